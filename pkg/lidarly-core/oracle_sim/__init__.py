# Synthetic scene generation package
