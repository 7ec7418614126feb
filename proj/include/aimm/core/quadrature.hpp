#pragma once

#include <array>

namespace aimm {

// Quadrature on the reference triangle in barycentric coordinates.
// Weights sum to 1; multiply by the physical area.
struct TriQuadPoint {
    std::array<double, 3> bary;
    double w;
};

// degree-1 exact: centroid rule
inline constexpr std::array<TriQuadPoint, 1> kTriQuad1{{
    {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1.0},
}};

// degree-2 exact: three interior points
inline constexpr std::array<TriQuadPoint, 3> kTriQuad3{{
    {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
}};

// degree-4 exact: six points (used where tau varies strongly)
inline constexpr std::array<TriQuadPoint, 6> kTriQuad6{{
    {{0.816847572980459, 0.091576213509771, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.816847572980459, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.091576213509771, 0.816847572980459}, 0.109951743655322},
    {{0.108103018168070, 0.445948490915965, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.108103018168070, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.445948490915965, 0.108103018168070}, 0.223381589678011},
}};

// Gauss rules on [0,1] for edge integrals; weights sum to 1.
struct LineQuadPoint {
    double s;
    double w;
};

inline constexpr std::array<LineQuadPoint, 2> kLineQuad2{{
    {0.21132486540518712, 0.5},
    {0.78867513459481288, 0.5},
}};

inline constexpr std::array<LineQuadPoint, 3> kLineQuad3{{
    {0.11270166537925831, 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.88729833462074169, 5.0 / 18.0},
}};

}  // namespace aimm
