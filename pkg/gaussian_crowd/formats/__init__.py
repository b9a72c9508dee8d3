# On-disk assets, scene configs, images and CSV reports
