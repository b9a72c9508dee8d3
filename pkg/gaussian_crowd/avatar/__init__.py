# Skeletons, motion clips, multi-level templates and skinning
