# Depth lifting package
