# Crowd layout, per-frame animation and instancing memory model
