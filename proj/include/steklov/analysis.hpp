#pragma once

#include <steklov/mesh.hpp>
#include <steklov/types.hpp>

#include <cstdint>
#include <vector>

namespace steklov {

enum class SpectrumSource { Steklov, Laplace, Fem };

// Leading eigenpairs of one operator pencil; modes are M-orthonormal vertex
// vectors with ascending eigenvalues.
struct TruncatedSpectrum {
  Vector eigenvalues;
  Matrix modes;  // n x k
  SpectrumSource source = SpectrumSource::Steklov;

  Index count() const { return eigenvalues.size(); }
  Index vertex_count() const { return modes.rows(); }
  // Index of the first eigenvalue above the numerical-zero threshold.
  Index first_nonzero() const;
};

// Dense reference eigensolve of the pencil (A, M), smallest k pairs.
TruncatedSpectrum dense_spectrum(const Matrix& A, const SparseMatrix& M, int k,
                                 SpectrumSource source);
TruncatedSpectrum dense_spectrum(const SparseMatrix& A, const SparseMatrix& M, int k,
                                 SpectrumSource source);

// k_t(x,y) = sum_i exp(-lambda_i t) phi_i(x) phi_i(y) over the truncation.
double heat_kernel(const TruncatedSpectrum& spec, double t, Index x, Index y);

// Logarithmic time grid on [4 ln10 / lambda_max, 4 ln10 / lambda_first_nonzero].
Vector default_hks_times(const TruncatedSpectrum& spec, int samples = 100);

// Rows = vertices, columns = times. With `scaled`, each column is divided by
// its (mass-weighted when available) mesh average.
Matrix hks(const TruncatedSpectrum& spec, const Vector& times, bool scaled = false,
           const Vector* vertex_mass = nullptr);

struct WksGrid {
  Vector energies;
  double sigma = 0;
};

WksGrid default_wks_grid(const TruncatedSpectrum& spec, int samples = 100);

// Log-normal band-pass signature; energy weights are normalized to sum to one
// per column. Modes at or below the zero threshold are excluded.
Matrix wks(const TruncatedSpectrum& spec, const Vector& energies, double sigma);

// d_D(x,.)^2 = sum_{i>=1} exp(-2 t lambda_i) (phi_i(x) - phi_i(.))^2.
Vector diffusion_distance(const TruncatedSpectrum& spec, double t, Index x);

// d_B(x,.)^2 = sum_{i>=1} lambda_i^{-2} (phi_i(x) - phi_i(.))^2.
Vector bisteklov_distance(const TruncatedSpectrum& spec, Index x);

// Row x = (phi_1(x)/sqrt(lambda_1), ..., phi_k(x)/sqrt(lambda_k)).
Matrix spectral_embedding(const TruncatedSpectrum& spec, int k);

// Lloyd k-means with k-means++ seeding, best of `restarts` runs by
// within-cluster sum of squares. Deterministic for a fixed seed.
std::vector<int> kmeans(const Matrix& rows, int clusters, int restarts, std::uint64_t seed);

// k-means over the spectral embedding built from all nonzero modes.
std::vector<int> segment(const TruncatedSpectrum& spec, int clusters, int restarts = 10,
                         std::uint64_t seed = 0);

// F = PhiN^+ P PhiM with the M_N-weighted pseudo-inverse and P the selection
// matrix of the vertex correspondence (source vertex v -> target vertex
// correspondence[v]). condition_out, when given, receives cond(F).
Matrix functional_map(const TruncatedSpectrum& source, const TruncatedSpectrum& target,
                      const SparseMatrix& target_mass, const std::vector<Index>& correspondence,
                      double* condition_out = nullptr);

enum class InnerProductBase { Area, Conformal, Steklov };

// D = G_M^{-1} F^T G_N F in the retained modes. Constant modes are deflated
// for the conformal and steklov bases (their Gram is singular there).
struct ShapeDifference {
  Matrix D;
  Matrix F;  // restricted to retained modes
  InnerProductBase base = InnerProductBase::Area;
  Index dropped_source = 0;  // leading source modes removed
  Index dropped_target = 0;
};

// Conformal base needs the cotangent stiffness of both shapes.
ShapeDifference shape_difference(const TruncatedSpectrum& source, const TruncatedSpectrum& target,
                                 const Matrix& F, InnerProductBase base,
                                 const SparseMatrix* source_stiffness = nullptr,
                                 const SparseMatrix* target_stiffness = nullptr);

// distortion_i = |e_i|^2 / (e_i' D e_i) with e_i the truncated-basis
// coefficients of the hat at vertex i; +inf where the denominator vanishes.
Vector pointwise_distortion(const ShapeDifference& diff, const TruncatedSpectrum& source,
                            const SparseMatrix& source_mass);

// First `count` eigenvalues; normalized variant multiplies by the
// isoperimetric scale of the mesh.
Vector shape_dna(const TruncatedSpectrum& spec, int count, bool normalize,
                 const TriangleMesh& mesh);

// Centered PCA projection of the input vectors onto `dims` components.
Matrix pca_embed(const std::vector<Vector>& vectors, int dims);

}  // namespace steklov
