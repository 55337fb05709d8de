#include <steklov/analysis.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

namespace steklov {

namespace {

double zero_threshold(const Vector& eigenvalues) {
  const double top = eigenvalues.size() ? std::abs(eigenvalues[eigenvalues.size() - 1]) : 0.0;
  return std::max(top, 1.0e-300) * 1e-8;
}

}  // namespace

Index TruncatedSpectrum::first_nonzero() const {
  const double cut = zero_threshold(eigenvalues);
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] > cut) return i;
  }
  return eigenvalues.size();
}

TruncatedSpectrum dense_spectrum(const Matrix& A, const SparseMatrix& M, int k,
                                 SpectrumSource source) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(0.5 * (A + A.transpose()), Matrix(M));
  if (solver.info() != Eigen::Success) throw NoConvergence("dense_spectrum: eigensolver failed");
  const Index kk = std::min<Index>(k, A.rows());
  TruncatedSpectrum spec;
  spec.eigenvalues = solver.eigenvalues().head(kk);
  spec.modes = solver.eigenvectors().leftCols(kk);
  spec.source = source;
  return spec;
}

TruncatedSpectrum dense_spectrum(const SparseMatrix& A, const SparseMatrix& M, int k,
                                 SpectrumSource source) {
  return dense_spectrum(Matrix(A), M, k, source);
}

double heat_kernel(const TruncatedSpectrum& spec, double t, Index x, Index y) {
  if (t <= 0) throw Error("heat_kernel: t must be positive");
  double sum = 0;
  for (Index i = 0; i < spec.count(); ++i) {
    sum += std::exp(-spec.eigenvalues[i] * t) * spec.modes(x, i) * spec.modes(y, i);
  }
  return sum;
}

Vector default_hks_times(const TruncatedSpectrum& spec, int samples) {
  const Index lo = spec.first_nonzero();
  if (lo >= spec.count()) throw Error("default_hks_times: no nonzero eigenvalues");
  const double lambda_min = spec.eigenvalues[lo];
  const double lambda_max = spec.eigenvalues[spec.count() - 1];
  const double t_min = 4.0 * std::log(10.0) / lambda_max;
  const double t_max = 4.0 * std::log(10.0) / lambda_min;
  Vector times(samples);
  if (samples == 1) {
    times[0] = std::sqrt(t_min * t_max);
    return times;
  }
  const double step = (std::log(t_max) - std::log(t_min)) / (samples - 1);
  for (int i = 0; i < samples; ++i) times[i] = std::exp(std::log(t_min) + step * i);
  return times;
}

Matrix hks(const TruncatedSpectrum& spec, const Vector& times, bool scaled,
           const Vector* vertex_mass) {
  const Index n = spec.vertex_count();
  Matrix table(n, times.size());
  const Matrix squared = spec.modes.array().square();
  for (Index j = 0; j < times.size(); ++j) {
    if (times[j] <= 0) throw Error("hks: times must be positive");
    const Vector weights = (-spec.eigenvalues.array() * times[j]).exp();
    table.col(j) = squared * weights;
    if (scaled) {
      double average = 0;
      if (vertex_mass) {
        average = vertex_mass->dot(table.col(j)) / vertex_mass->sum();
      } else {
        average = table.col(j).mean();
      }
      if (average > 0) table.col(j) /= average;
    }
  }
  return table;
}

WksGrid default_wks_grid(const TruncatedSpectrum& spec, int samples) {
  const Index lo = spec.first_nonzero();
  if (lo >= spec.count()) throw Error("default_wks_grid: no nonzero eigenvalues");
  const double e_lo = std::log(spec.eigenvalues[lo]);
  const double e_hi = std::log(spec.eigenvalues[spec.count() - 1]);
  WksGrid grid;
  const double delta = (e_hi - e_lo) / std::max(samples - 1, 1);
  grid.sigma = 7.0 * delta;
  const double lo_pad = e_lo + 2.0 * grid.sigma;
  const double hi_pad = e_hi - 2.0 * grid.sigma;
  const double a = lo_pad < hi_pad ? lo_pad : e_lo;
  const double b = lo_pad < hi_pad ? hi_pad : e_hi;
  grid.energies.resize(samples);
  for (int i = 0; i < samples; ++i) {
    grid.energies[i] = samples == 1 ? 0.5 * (a + b) : a + (b - a) * i / (samples - 1);
  }
  if (grid.sigma <= 0) grid.sigma = 1.0;
  return grid;
}

Matrix wks(const TruncatedSpectrum& spec, const Vector& energies, double sigma) {
  if (sigma <= 0) throw Error("wks: sigma must be positive");
  const Index lo = spec.first_nonzero();
  if (lo >= spec.count()) throw Error("wks: no nonzero eigenvalues");
  const Index n = spec.vertex_count();
  Matrix table = Matrix::Zero(n, energies.size());
  for (Index j = 0; j < energies.size(); ++j) {
    double total = 0;
    Vector weights = Vector::Zero(spec.count());
    for (Index i = lo; i < spec.count(); ++i) {
      const double d = (energies[j] - std::log(spec.eigenvalues[i])) / sigma;
      weights[i] = std::exp(-0.5 * d * d);
      total += weights[i];
    }
    if (total <= 0) total = 1;
    table.col(j) = (spec.modes.array().square().matrix() * weights) / total;
  }
  return table;
}

Vector diffusion_distance(const TruncatedSpectrum& spec, double t, Index x) {
  if (t <= 0) throw Error("diffusion_distance: t must be positive");
  const Index n = spec.vertex_count();
  Vector squared = Vector::Zero(n);
  for (Index i = 1; i < spec.count(); ++i) {
    const double w = std::exp(-2.0 * t * spec.eigenvalues[i]);
    squared += w * (spec.modes.col(i).array() - spec.modes(x, i)).square().matrix();
  }
  return squared.cwiseSqrt();
}

Vector bisteklov_distance(const TruncatedSpectrum& spec, Index x) {
  const Index n = spec.vertex_count();
  Vector squared = Vector::Zero(n);
  for (Index i = 1; i < spec.count(); ++i) {
    const double lambda = spec.eigenvalues[i];
    if (lambda <= 0) throw Error("bisteklov_distance: nonpositive eigenvalue past the constant");
    squared += (spec.modes.col(i).array() - spec.modes(x, i)).square().matrix() / (lambda * lambda);
  }
  return squared.cwiseSqrt();
}

Matrix spectral_embedding(const TruncatedSpectrum& spec, int k) {
  const Index lo = spec.first_nonzero();
  if (lo + k > spec.count()) throw Error("spectral_embedding: not enough nonzero modes");
  Matrix embedding(spec.vertex_count(), k);
  for (int i = 0; i < k; ++i) {
    embedding.col(i) = spec.modes.col(lo + i) / std::sqrt(spec.eigenvalues[lo + i]);
  }
  return embedding;
}

namespace {

double assign_labels(const Matrix& rows, const Matrix& centers, std::vector<int>& labels) {
  double wcss = 0;
  for (Index i = 0; i < rows.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Index c = 0; c < centers.rows(); ++c) {
      const double d = (rows.row(i) - centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[i] = arg;
    wcss += best;
  }
  return wcss;
}

}  // namespace

std::vector<int> kmeans(const Matrix& rows, int clusters, int restarts, std::uint64_t seed) {
  const Index n = rows.rows();
  if (clusters < 1) throw Error("kmeans: clusters must be positive");
  std::vector<int> best_labels(n, 0);
  if (clusters == 1) return best_labels;
  double best_wcss = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);

  for (int restart = 0; restart < std::max(restarts, 1); ++restart) {
    // k-means++ seeding.
    Matrix centers(clusters, rows.cols());
    std::uniform_int_distribution<Index> uniform(0, n - 1);
    centers.row(0) = rows.row(uniform(rng));
    Vector dist2 = (rows.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < clusters; ++c) {
      const double total = dist2.sum();
      Index pick = 0;
      if (total > 0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double threshold = u(rng), acc = 0;
        for (Index i = 0; i < n; ++i) {
          acc += dist2[i];
          if (acc >= threshold) {
            pick = i;
            break;
          }
        }
      } else {
        pick = uniform(rng);
      }
      centers.row(c) = rows.row(pick);
      dist2 = dist2.cwiseMin((rows.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> labels(n, 0);
    double wcss = assign_labels(rows, centers, labels);
    for (int iter = 0; iter < 100; ++iter) {
      Matrix sums = Matrix::Zero(clusters, rows.cols());
      std::vector<Index> counts(clusters, 0);
      for (Index i = 0; i < n; ++i) {
        sums.row(labels[i]) += rows.row(i);
        ++counts[labels[i]];
      }
      for (int c = 0; c < clusters; ++c) {
        if (counts[c] > 0) centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
      }
      const double next = assign_labels(rows, centers, labels);
      if (next >= wcss - 1e-15 * std::max(1.0, wcss)) {
        wcss = next;
        break;
      }
      wcss = next;
    }
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_labels = labels;
    }
  }
  return best_labels;
}

std::vector<int> segment(const TruncatedSpectrum& spec, int clusters, int restarts,
                         std::uint64_t seed) {
  const int usable = static_cast<int>(spec.count() - spec.first_nonzero());
  if (usable < 1) throw Error("segment: no nonzero modes");
  return kmeans(spectral_embedding(spec, usable), clusters, restarts, seed);
}

Matrix functional_map(const TruncatedSpectrum& source, const TruncatedSpectrum& target,
                      const SparseMatrix& target_mass, const std::vector<Index>& correspondence,
                      double* condition_out) {
  if (static_cast<Index>(correspondence.size()) != source.vertex_count()) {
    throw Error("functional_map: correspondence must cover every source vertex");
  }
  Matrix pushed = Matrix::Zero(target.vertex_count(), source.count());
  for (Index v = 0; v < source.vertex_count(); ++v) {
    const Index w = correspondence[v];
    if (w < 0 || w >= target.vertex_count()) {
      throw IndexError("functional_map: correspondence target out of range");
    }
    pushed.row(w) += source.modes.row(v);
  }
  const Matrix F = target.modes.transpose() * (target_mass * pushed);
  if (condition_out) {
    Eigen::JacobiSVD<Matrix> svd(F);
    const double smin = svd.singularValues().minCoeff();
    *condition_out = smin > 0 ? svd.singularValues().maxCoeff() / smin
                              : std::numeric_limits<double>::infinity();
  }
  return F;
}

namespace {

Matrix spectral_gram(const TruncatedSpectrum& spec, InnerProductBase base,
                     const SparseMatrix* stiffness) {
  switch (base) {
    case InnerProductBase::Area:
      return Matrix::Identity(spec.count(), spec.count());
    case InnerProductBase::Steklov:
      return Matrix(spec.eigenvalues.asDiagonal());
    case InnerProductBase::Conformal: {
      if (!stiffness) throw Error("shape_difference: conformal base needs the stiffness matrix");
      return spec.modes.transpose() * (*stiffness * spec.modes);
    }
  }
  return Matrix();
}

}  // namespace

ShapeDifference shape_difference(const TruncatedSpectrum& source, const TruncatedSpectrum& target,
                                 const Matrix& F, InnerProductBase base,
                                 const SparseMatrix* source_stiffness,
                                 const SparseMatrix* target_stiffness) {
  if (F.rows() != target.count() || F.cols() != source.count()) {
    throw Error("shape_difference: functional map dimensions do not match the spectra");
  }
  const Index drop_source = base == InnerProductBase::Area ? 0 : source.first_nonzero();
  const Index drop_target = base == InnerProductBase::Area ? 0 : target.first_nonzero();
  const Index ks = source.count() - drop_source;
  const Index kt = target.count() - drop_target;
  if (ks < 1 || kt < 1) throw SingularGram("shape_difference: nothing left after deflation");

  TruncatedSpectrum src{source.eigenvalues.tail(ks), source.modes.rightCols(ks), source.source};
  TruncatedSpectrum tgt{target.eigenvalues.tail(kt), target.modes.rightCols(kt), target.source};
  const Matrix f = F.block(drop_target, drop_source, kt, ks);

  const Matrix gram_source = spectral_gram(src, base, source_stiffness);
  const Matrix gram_target = spectral_gram(tgt, base, target_stiffness);

  Eigen::LDLT<Matrix> chol(0.5 * (gram_source + gram_source.transpose()));
  if (chol.info() != Eigen::Success || !chol.isPositive()) {
    throw SingularGram("shape_difference: source Gram is not positive definite");
  }
  ShapeDifference diff;
  diff.D = chol.solve(f.transpose() * gram_target * f);
  diff.F = f;
  diff.base = base;
  diff.dropped_source = drop_source;
  diff.dropped_target = drop_target;
  return diff;
}

Vector pointwise_distortion(const ShapeDifference& diff, const TruncatedSpectrum& source,
                            const SparseMatrix& source_mass) {
  const Index n = source.vertex_count();
  const Index kept = diff.D.rows();
  // Coefficients of every vertex hat in the retained modes: E = Phi^T M.
  const Matrix coeffs =
      source.modes.rightCols(kept).transpose() * source_mass;  // kept x n
  const Matrix dcoeffs = diff.D * coeffs;
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double numerator = coeffs.col(i).squaredNorm();
    const double denominator = coeffs.col(i).dot(dcoeffs.col(i));
    out[i] = std::abs(denominator) > 1e-300 * std::max(numerator, 1.0)
                 ? numerator / denominator
                 : std::numeric_limits<double>::infinity();
  }
  return out;
}

Vector shape_dna(const TruncatedSpectrum& spec, int count, bool normalize,
                 const TriangleMesh& mesh) {
  if (count > spec.count()) throw Error("shape_dna: fewer eigenvalues available than requested");
  Vector dna = spec.eigenvalues.head(count);
  if (normalize) dna *= isoperimetric_scale(mesh);  // throws DegenerateVolume
  return dna;
}

Matrix pca_embed(const std::vector<Vector>& vectors, int dims) {
  if (vectors.size() < 2) throw Error("pca_embed: need at least two vectors");
  const Index n = static_cast<Index>(vectors.size());
  const Index d = vectors.front().size();
  Matrix data(n, d);
  for (Index i = 0; i < n; ++i) {
    if (vectors[static_cast<std::size_t>(i)].size() != d) {
      throw Error("pca_embed: inconsistent vector lengths");
    }
    data.row(i) = vectors[static_cast<std::size_t>(i)].transpose();
  }
  const Vector mean = data.colwise().mean();
  data.rowwise() -= mean.transpose();
  Eigen::BDCSVD<Matrix> svd(data, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix coords = Matrix::Zero(n, dims);
  const Index available = std::min<Index>(dims, svd.singularValues().size());
  coords.leftCols(available) =
      svd.matrixU().leftCols(available) * svd.singularValues().head(available).asDiagonal();
  return coords;
}

}  // namespace steklov
