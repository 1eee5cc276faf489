# Voxel grid package
