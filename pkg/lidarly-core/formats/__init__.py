# File formats package
