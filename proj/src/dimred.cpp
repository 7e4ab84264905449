#include "wingbench/dimred.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace wingbench {

PcaModel pca_fit(const Mat& data, double variance_threshold, int fixed_r) {
  const Eigen::Index n = data.rows(), p = data.cols();
  if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 rows");
  if (p < 1) throw std::invalid_argument("pca_fit: need at least 1 column");
  if (fixed_r < 0 && !(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw std::invalid_argument("pca_fit: variance_threshold outside (0, 1]");
  if (fixed_r > p) throw std::invalid_argument("pca_fit: fixed_r exceeds column count");

  PcaModel m;
  m.mean = data.colwise().mean();
  m.scale.resize(p);
  Mat Z = data;
  Z.rowwise() -= m.mean.transpose();
  bool any_varying = false;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double var = Z.col(j).squaredNorm() / static_cast<double>(n - 1);
    m.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    if (var > 0.0) any_varying = true;
  }
  if (!any_varying) throw std::invalid_argument("pca_fit: all columns constant");
  for (Eigen::Index j = 0; j < p; ++j) Z.col(j) /= m.scale[j];

  const Eigen::MatrixXd corr = (Z.transpose() * Z) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
  if (es.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigensolver failed");

  // ascending from Eigen; store descending, clamp round-off negatives
  m.eigenvalues.resize(p);
  Mat comps(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    m.eigenvalues[j] = std::max(0.0, es.eigenvalues()[p - 1 - j]);
    comps.row(j) = es.eigenvectors().col(p - 1 - j).transpose();
  }
  // deterministic sign: largest-magnitude entry of each component positive
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::Index arg = 0;
    comps.row(j).cwiseAbs().maxCoeff(&arg);
    if (comps(j, arg) < 0.0) comps.row(j) = -comps.row(j);
  }

  const double total = m.eigenvalues.sum();
  int r;
  if (fixed_r >= 1) {
    r = fixed_r;
  } else {
    r = static_cast<int>(p);
    double cum = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      cum += m.eigenvalues[j];
      if (cum / total >= variance_threshold) {
        r = static_cast<int>(j) + 1;
        break;
      }
    }
  }
  m.retained_r = r;
  m.components = comps.topRows(r);
  m.explained_ratio = m.eigenvalues.head(r).sum() / total;
  return m;
}

Mat pca_project(const PcaModel& model, const Mat& rows) {
  if (rows.cols() != model.mean.size())
    throw std::invalid_argument("pca_project: column count mismatch");
  Mat Z = rows;
  Z.rowwise() -= model.mean.transpose();
  for (Eigen::Index j = 0; j < Z.cols(); ++j) Z.col(j) /= model.scale[j];
  return Z * model.components.transpose();
}

Mat pca_reconstruct(const PcaModel& model, const Mat& scores) {
  if (scores.cols() != model.retained_r)
    throw std::invalid_argument("pca_reconstruct: score width mismatch");
  Mat Z = scores * model.components;
  for (Eigen::Index j = 0; j < Z.cols(); ++j) Z.col(j) *= model.scale[j];
  Z.rowwise() += model.mean.transpose();
  return Z;
}

PiecewisePolyModel make_piecewise_poly(const Vec& stations, int split_station_index,
                                       int degree_inboard, int degree_outboard) {
  PiecewisePolyModel m;
  m.stations = stations;
  m.split_station_index = split_station_index;
  m.degree_inboard = degree_inboard;
  m.degree_outboard = degree_outboard;
  const int K = static_cast<int>(stations.size());
  if (split_station_index < 1 || split_station_index > K - 2)
    throw std::invalid_argument("piecewise poly: split index out of range");
  if (degree_inboard < 1 || degree_outboard < 1)
    throw std::invalid_argument("piecewise poly: degrees must be >= 1");
  if (split_station_index < degree_inboard + 1 || K - split_station_index < degree_outboard + 1)
    throw std::invalid_argument("piecewise poly: segment too short for its degree");
  for (int i = 0; i + 1 < K; ++i)
    if (!(stations[i + 1] > stations[i]))
      throw std::invalid_argument("piecewise poly: stations not strictly increasing");
  return m;
}

namespace {

// normalized abscissae of one segment: u in [0, 1]
Vec segment_u(const PiecewisePolyModel& m, int first, int count) {
  const double x0 = m.stations[first];
  const double xr = m.stations[first + count - 1] - x0;
  Vec u(count);
  for (int i = 0; i < count; ++i) u[i] = (m.stations[first + i] - x0) / xr;
  return u;
}

// least squares of one segment by normal equations; coeffs descending powers
void fit_segment(const Vec& u, const double* y, int count, int degree, double* out) {
  const int d = degree + 1;
  Eigen::MatrixXd A(count, d);
  for (int i = 0; i < count; ++i) {
    double pw = 1.0;
    for (int j = d - 1; j >= 0; --j) {
      A(i, j) = pw;  // column j holds u^(degree-j)
      pw *= u[i];
    }
  }
  Eigen::VectorXd b(count);
  for (int i = 0; i < count; ++i) b[i] = y[i];
  Eigen::MatrixXd AtA = A.transpose() * A;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(AtA);
  if (ldlt.info() != Eigen::Success)
    throw std::invalid_argument("piecewise_poly_fit: rank-deficient segment");
  Eigen::VectorXd c = ldlt.solve(A.transpose() * b);
  for (int j = 0; j < d; ++j) out[j] = c[j];
}

double eval_poly(const double* c, int degree, double u) {
  double v = 0.0;
  for (int j = 0; j <= degree; ++j) v = v * u + c[j];
  return v;
}

}  // namespace

Vec piecewise_poly_fit(const PiecewisePolyModel& m, const Vec& values) {
  const int K = static_cast<int>(m.stations.size());
  if (values.size() != K) throw std::invalid_argument("piecewise_poly_fit: curve size mismatch");
  const int s = m.split_station_index;
  Vec out(m.coeff_len());
  const Vec u_in = segment_u(m, 0, s);
  const Vec u_out = segment_u(m, s, K - s);
  fit_segment(u_in, values.data(), s, m.degree_inboard, out.data());
  fit_segment(u_out, values.data() + s, K - s, m.degree_outboard,
              out.data() + m.degree_inboard + 1);
  return out;
}

Vec piecewise_poly_eval(const PiecewisePolyModel& m, const Vec& coeffs) {
  if (coeffs.size() != m.coeff_len())
    throw std::invalid_argument("piecewise_poly_eval: coefficient size mismatch");
  const int K = static_cast<int>(m.stations.size());
  const int s = m.split_station_index;
  const Vec u_in = segment_u(m, 0, s);
  const Vec u_out = segment_u(m, s, K - s);
  Vec y(K);
  for (int i = 0; i < s; ++i)
    y[i] = eval_poly(coeffs.data(), m.degree_inboard, u_in[i]);
  for (int i = 0; i < K - s; ++i)
    y[s + i] = eval_poly(coeffs.data() + m.degree_inboard + 1, m.degree_outboard, u_out[i]);
  return y;
}

Mat piecewise_poly_encode(const PiecewisePolyModel& m, const Mat& Y) {
  Mat C(Y.rows(), m.coeff_len());
  for (Eigen::Index i = 0; i < Y.rows(); ++i)
    C.row(i) = piecewise_poly_fit(m, Y.row(i).transpose()).transpose();
  return C;
}

Mat piecewise_poly_decode(const PiecewisePolyModel& m, const Mat& coeffs) {
  Mat Y(coeffs.rows(), m.stations.size());
  for (Eigen::Index i = 0; i < coeffs.rows(); ++i)
    Y.row(i) = piecewise_poly_eval(m, coeffs.row(i).transpose()).transpose();
  return Y;
}

const char* to_string(OutputCodecKind k) {
  switch (k) {
    case OutputCodecKind::Raw: return "raw";
    case OutputCodecKind::PcaOnly: return "pca";
    case OutputCodecKind::PolyOnly: return "poly";
    case OutputCodecKind::PolyThenPca: return "poly_pca";
  }
  return "?";
}

const char* to_string(InputCodecKind k) {
  return k == InputCodecKind::Raw ? "raw" : "pca";
}

int OutputCodec::encoded_dim() const {
  switch (kind) {
    case OutputCodecKind::Raw: return kNumStations;
    case OutputCodecKind::PcaOnly: return pca->retained_r;
    case OutputCodecKind::PolyOnly: return poly->coeff_len();
    case OutputCodecKind::PolyThenPca: return coeff_pca->retained_r;
  }
  return 0;
}

Vec rowwise_r2(const Mat& Y, const Mat& Yhat) {
  if (Y.rows() != Yhat.rows() || Y.cols() != Yhat.cols())
    throw std::invalid_argument("rowwise_r2: shape mismatch");
  Vec r2(Y.rows());
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    const double mean = Y.row(i).mean();
    double sse = 0.0, sst = 0.0;
    for (Eigen::Index k = 0; k < Y.cols(); ++k) {
      const double d = Y(i, k) - Yhat(i, k);
      const double c = Y(i, k) - mean;
      sse += d * d;
      sst += c * c;
    }
    r2[i] = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
  }
  return r2;
}

namespace {

ReconStats recon_stats(const Mat& Y, const Mat& Yhat) {
  const Vec r2 = rowwise_r2(Y, Yhat);
  ReconStats s;
  s.r2_min = r2.minCoeff();
  s.r2_mean = r2.mean();
  s.frac_ge_999 =
      static_cast<double>((r2.array() >= 0.999).count()) / static_cast<double>(r2.size());
  return s;
}

}  // namespace

OutputCodec fit_output_codec(OutputCodecKind kind, const Mat& Y, const Vec& stations,
                             const OutputCodecParams& params) {
  OutputCodec c;
  c.kind = kind;
  switch (kind) {
    case OutputCodecKind::Raw:
      break;
    case OutputCodecKind::PcaOnly:
      c.pca = pca_fit(Y, params.pca_threshold);
      break;
    case OutputCodecKind::PolyOnly:
      c.poly = make_piecewise_poly(stations, params.split_station_index,
                                   params.degree_inboard, params.degree_outboard);
      break;
    case OutputCodecKind::PolyThenPca: {
      c.poly = make_piecewise_poly(stations, params.split_station_index,
                                   params.degree_inboard, params.degree_outboard);
      const Mat coeffs = piecewise_poly_encode(*c.poly, Y);
      c.coeff_pca = pca_fit(coeffs, 1.0, params.poly_pca_r);
      break;
    }
  }
  if (kind != OutputCodecKind::Raw)
    c.train_recon = recon_stats(Y, codec_decode(c, codec_encode(c, Y)));
  return c;
}

Mat codec_encode(const OutputCodec& codec, const Mat& outputs) {
  switch (codec.kind) {
    case OutputCodecKind::Raw:
      return outputs;
    case OutputCodecKind::PcaOnly:
      if (!codec.pca) throw std::invalid_argument("codec_encode: unfitted PCA codec");
      return pca_project(*codec.pca, outputs);
    case OutputCodecKind::PolyOnly:
      if (!codec.poly) throw std::invalid_argument("codec_encode: unfitted poly codec");
      return piecewise_poly_encode(*codec.poly, outputs);
    case OutputCodecKind::PolyThenPca:
      if (!codec.poly || !codec.coeff_pca)
        throw std::invalid_argument("codec_encode: unfitted poly+PCA codec");
      return pca_project(*codec.coeff_pca, piecewise_poly_encode(*codec.poly, outputs));
  }
  throw std::invalid_argument("codec_encode: unknown codec kind");
}

Mat codec_decode(const OutputCodec& codec, const Mat& reduced) {
  switch (codec.kind) {
    case OutputCodecKind::Raw:
      return reduced;
    case OutputCodecKind::PcaOnly:
      if (!codec.pca) throw std::invalid_argument("codec_decode: unfitted PCA codec");
      return pca_reconstruct(*codec.pca, reduced);
    case OutputCodecKind::PolyOnly:
      if (!codec.poly) throw std::invalid_argument("codec_decode: unfitted poly codec");
      return piecewise_poly_decode(*codec.poly, reduced);
    case OutputCodecKind::PolyThenPca:
      if (!codec.poly || !codec.coeff_pca)
        throw std::invalid_argument("codec_decode: unfitted poly+PCA codec");
      return piecewise_poly_decode(*codec.poly, pca_reconstruct(*codec.coeff_pca, reduced));
  }
  throw std::invalid_argument("codec_decode: unknown codec kind");
}

}  // namespace wingbench
