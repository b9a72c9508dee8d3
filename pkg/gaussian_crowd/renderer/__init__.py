# Splat gathering, depth sort and tiled rasterization
