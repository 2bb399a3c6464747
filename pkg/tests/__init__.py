# Tests package for cyclomoment