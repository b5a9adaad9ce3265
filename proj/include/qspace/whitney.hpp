#pragma once

#include <vector>

#include "qspace/geometry.hpp"
#include "qspace/pointset.hpp"

namespace qspace {

// Dyadic cube relative to the grid rooted at the decomposition bbox:
// edge = root_edge * 2^{-level}, min corner on the level's grid.
struct WhitneyCube {
    Cube cube;
    int level = 0;
    bool touches_bbox_boundary = false;
};

struct WhitneyOptions {
    // Accept a cube S once c1*sqrt(n)*edge <= dist(S, E) <= c2*sqrt(n)*edge.
    // The classical constants; the comparability is what the counting
    // argument uses, not the values themselves.
    double c1 = 1.0;
    double c2 = 4.0;
};

struct WhitneyDecomposition {
    std::vector<WhitneyCube> cubes;
    bool empty_warning = false;   // level_max too small to separate any cube from E
    int level_max = 0;
};

// Tiles bbox \ (cubes touching E at resolution 2^{-level_max}) by dyadic
// cubes with edge comparable to their distance from E.
WhitneyDecomposition whitney_decompose(const PointSet& e, const Cube& bbox, int level_max,
                                       const WhitneyOptions& opt = {});

// Aligned tiling of bbox by cubes with edge bbox.edge * 2^{-level}.
std::vector<Cube> dyadic_cubes(int level, const Cube& bbox);

} // namespace qspace
