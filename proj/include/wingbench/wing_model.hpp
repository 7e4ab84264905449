#pragma once

#include "wingbench/types.hpp"

#include <cstdint>
#include <utility>

namespace wingbench {

// All geometry defaults are plausibility choices for a ~30 m semi-span
// twin-aisle wing; none are measurements. See README for the rationale.
struct WingGeometry {
  double span_L = 30.0;             // semi-span (m)
  double chord_root_Co = 7.0;       // root chord (m)
  double chord_tip_Ct = 2.8;        // tip chord (m)
  double tank_Lf = 23.455;          // fuel tank spanwise extent, tip-anchored (m)
  double tank_Ctf = 2.8;            // tank chord at tip end (m)
  double tank_Cof = 6.08;           // tank chord at inboard end (m)
  double box_height_root = 0.9;     // wing-box height at root (m)
  double box_height_tip = 0.15;     // wing-box height at tip (m)
  double sigma_max = 4.0e8;         // allowable cover stress (Pa)
  double rho = 2700.0;              // cover material density (kg/m^3)
  double cover_weight_fraction = 0.30;

  double chord(double x) const {
    return chord_root_Co + (chord_tip_Ct - chord_root_Co) * x / span_L;
  }
  double box_height(double x) const {
    return box_height_root + (box_height_tip - box_height_root) * x / span_L;
  }
  void validate() const;  // throws std::invalid_argument on violation
};

inline constexpr double kGravity = 9.80665;  // m/s^2

// Spanwise lift profile. The default is a two-level profile, heavier inboard
// of the flap break: the unique shape family whose bending moments stay
// exactly piecewise-quadratic at the stations (M'' = Q must be piecewise
// constant), which the piecewise polynomial output codec relies on.
// Uniform is the degenerate override used by the load oracles.
enum class LiftShape { Stepped, Uniform };

// 29 cosine-spaced stations, denser near the root: x_k = L(1 - cos(k*pi/56)).
Vec cosine_stations(double span_L);

// Index of the first station at or outboard of the inboard/outboard break
// (the lift step and the tank root both sit between stations 11 and 12 for
// the default geometry).
int break_station_index(const WingGeometry& geom, const Vec& stations);

struct LoadComponents {
  Vec lift;        // N/m at each station
  Vec fuel;        // N/m, downward (relief), nonzero only over the tank span
  Vec structure;   // N/m, downward, proportional to local chord
  double struct_weight_kg = 0.0;  // converged wing structural weight
  Vec total() const { return lift + fuel + structure; }
};

// Q_total = Q_lift + Q_fuel + Q_wingstructure evaluated on the stations.
// The structural weight is resolved internally by a short fixed-point loop
// (weight -> moment -> cover thickness -> weight).
LoadComponents load_distributions(const WingGeometry& geom, const Vec& features,
                                  const Vec& stations,
                                  LiftShape shape = LiftShape::Stepped);

// Cantilever convention: V(x) = -int_x^L Q ds, M(x) = -int_x^L V ds, both by
// cumulative trapezoid from the tip, so V(L) = M(L) = 0.
std::pair<Vec, Vec> shear_and_moment(const Vec& Q, const Vec& stations);

struct CoverWeight {
  Vec thickness;       // t(x) = |M| / (h C sigma_max), m
  double W_cover_kg = 0.0;   // 2 rho int t C dx
  double W_wing_kg = 0.0;    // W_cover / cover_weight_fraction
};

CoverWeight thickness_and_cover_weight(const Vec& M, const WingGeometry& geom,
                                       const Vec& stations);

// Table-driven feature sampler. Deterministic per (seed, row, column):
// changing mtow only perturbs the mass and outer-tank columns.
Mat sample_features(int mtow_tons, Eigen::Index n, uint64_t seed);

// feature column indices that the physics actually reads
inline constexpr int kIdxMass = 11;
inline constexpr int kIdxAltitude = 14;
inline constexpr int kIdxLoadFactorX = 17;
inline constexpr int kIdxLoadFactorZ = 19;
inline constexpr int kIdxTankFirst = 20;  // four tank columns 20..23

Dataset generate_dataset(const WingGeometry& geom, int mtow_tons, Eigen::Index n,
                         uint64_t seed, double noise_rel,
                         LiftShape shape = LiftShape::Stepped);

}  // namespace wingbench
