# Tests for the Vizing edge-coloring toolkit
