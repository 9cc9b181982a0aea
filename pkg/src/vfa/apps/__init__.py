"""Applications built on function vectors: density estimation, regression and images."""
