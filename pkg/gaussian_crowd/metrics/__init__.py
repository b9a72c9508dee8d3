# Image quality and frame-rate measurement
