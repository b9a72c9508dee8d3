# Camera, rigid geometry and Gaussian splat math
