#pragma once

#include "wingbench/types.hpp"

#include <optional>

namespace wingbench {

struct PcaModel {
  Vec mean;          // column means
  Vec scale;         // column stds; 1.0 where a column is constant
  Mat components;    // retained_r x p, orthonormal rows, deterministic sign
  Vec eigenvalues;   // all p eigenvalues, descending, clamped at 0
  int retained_r = 0;
  double explained_ratio = 0.0;  // sum(retained) / sum(all)
};

// Correlation-matrix PCA (columns centered and scaled). Retains the smallest
// r whose cumulative explained variance reaches variance_threshold; fixed_r
// overrides the threshold when >= 1 (used by the poly+PCA codec).
PcaModel pca_fit(const Mat& data, double variance_threshold, int fixed_r = -1);

Mat pca_project(const PcaModel& model, const Mat& rows);
Mat pca_reconstruct(const PcaModel& model, const Mat& scores);

struct PiecewisePolyModel {
  int split_station_index = 12;  // first station of the outboard segment
  int degree_inboard = 2;
  int degree_outboard = 2;
  Vec stations;  // fixed abscissae the codec was built for

  int coeff_len() const { return degree_inboard + degree_outboard + 2; }
};

PiecewisePolyModel make_piecewise_poly(const Vec& stations, int split_station_index = 12,
                                       int degree_inboard = 2, int degree_outboard = 2);

// Least-squares fit of one curve: two independent polynomials on stations
// [0, split) and [split, end), abscissa normalized to [0,1] per segment.
// Coefficients concatenated inboard first, descending powers.
Vec piecewise_poly_fit(const PiecewisePolyModel& model, const Vec& values);
Vec piecewise_poly_eval(const PiecewisePolyModel& model, const Vec& coeffs);

Mat piecewise_poly_encode(const PiecewisePolyModel& model, const Mat& Y);
Mat piecewise_poly_decode(const PiecewisePolyModel& model, const Mat& coeffs);

enum class OutputCodecKind { Raw, PcaOnly, PolyOnly, PolyThenPca };
enum class InputCodecKind { Raw, Pca };

const char* to_string(OutputCodecKind k);
const char* to_string(InputCodecKind k);

// Reconstruction quality of encode-then-decode measured on the fitting data.
struct ReconStats {
  double r2_min = 1.0;
  double r2_mean = 1.0;
  double frac_ge_999 = 1.0;  // fraction of rows with per-row R^2 >= 0.999
};

// Invertible output-space transform: n x 29 curves <-> n x d codes,
// d in {29, <=6, 6, 4} for Raw / PcaOnly / PolyOnly / PolyThenPca.
struct OutputCodec {
  OutputCodecKind kind = OutputCodecKind::Raw;
  std::optional<PcaModel> pca;        // PcaOnly
  std::optional<PiecewisePolyModel> poly;  // PolyOnly, PolyThenPca
  std::optional<PcaModel> coeff_pca;  // PolyThenPca, fixed r
  ReconStats train_recon;

  int encoded_dim() const;
};

struct OutputCodecParams {
  double pca_threshold = 0.9999;
  int poly_pca_r = 4;
  int split_station_index = 12;
  int degree_inboard = 2;
  int degree_outboard = 2;
};

OutputCodec fit_output_codec(OutputCodecKind kind, const Mat& Y, const Vec& stations,
                             const OutputCodecParams& params = {});

Mat codec_encode(const OutputCodec& codec, const Mat& outputs);
Mat codec_decode(const OutputCodec& codec, const Mat& reduced);

// Per-row coefficient of determination of a reconstruction against the row's
// own mean; rows with zero variance score 1 when reproduced exactly.
Vec rowwise_r2(const Mat& Y, const Mat& Yhat);

}  // namespace wingbench
