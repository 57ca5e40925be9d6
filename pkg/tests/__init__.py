# Tests for manclust package
