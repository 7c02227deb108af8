// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "tatumkit/audio_io.hpp"
#include "tatumkit/error.hpp"
#include "tatumkit/spectral.hpp"

/// Independent Subspace Analysis: a mono mixture is moved to the
/// time-frequency plane, reduced with a covariance eigen-decomposition,
/// rotated to independence with a fourth-order cumulant contrast, and each
/// independent component is resynthesized from its rank-1 subspace
/// spectrogram using the mixture phase.
namespace tatumkit::separate {

/// A full-rank square mixing matrix paired with its inverse.
class MixingModel {
 public:
  /// Throws DimensionMismatch for a non-square matrix and RankDeficient for
  /// a singular one.
  static MixingModel from_mixing(Eigen::MatrixXd mixing);
  static MixingModel from_unmixing(Eigen::MatrixXd unmixing);

  const Eigen::MatrixXd& mixing() const noexcept { return mixing_; }
  const Eigen::MatrixXd& unmixing() const noexcept { return unmixing_; }
  Eigen::Index size() const noexcept { return mixing_.rows(); }

 private:
  MixingModel(Eigen::MatrixXd mixing, Eigen::MatrixXd unmixing)
      : mixing_(std::move(mixing)), unmixing_(std::move(unmixing)) {}

  Eigen::MatrixXd mixing_;
  Eigen::MatrixXd unmixing_;
};

/// Y = M X, one source per row.
Eigen::MatrixXd mix(const Eigen::MatrixXd& sources, const MixingModel& model);

/// X = M^-1 Y.
Eigen::MatrixXd unmix(const Eigen::MatrixXd& mixed, const MixingModel& model);

/// C = Xc Xc^T where Xc has each row's mean removed. Unnormalized.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& data);

struct WhiteningResult {
  Eigen::MatrixXd rotation;       ///< V^T of the covariance decomposition, rows by descending variance
  Eigen::VectorXd scale;          ///< covariance eigenvalues D, non-negative, non-increasing
  Eigen::MatrixXd reduced_basis;  ///< first `retained` columns of V
  Eigen::Index retained = 0;

  Eigen::VectorXd mean;           ///< row means removed before projection
  Eigen::MatrixXd whitening;      ///< retained x n; whitened = whitening * (data - mean)
  Eigen::MatrixXd dewhitening;    ///< n x retained; reduced_basis scaled back to data units
  Eigen::MatrixXd whitened;       ///< retained x m, (1/m) Z Z^T == I

  Diagnostics diagnostics;
};

/// Rows are variables, columns observations. `retained` components are kept;
/// if that exceeds the numerical rank it is clamped with a RankDeficient
/// diagnostic. Throws RankDeficient when the data has no variance at all.
WhiteningResult whiten(const Eigen::MatrixXd& data, Eigen::Index retained);

/// Histogram approximation of a one-dimensional density.
struct PdfHistogram {
  std::vector<double> bin_edges;  ///< bins + 1 ascending edges
  std::vector<double> counts;
  double mass = 0.0;

  /// Equal-width bins spanning [min, max] of the samples.
  static PdfHistogram from_samples(std::span<const double> samples, std::size_t bins);
  std::vector<double> normalized() const;
};

/// Floor added to every bin before taking logarithms.
inline constexpr double kHistogramEpsilon = 1e-12;

/// sum p ln(p / q) over normalized histograms of equal length, in nats.
/// Throws BinningMismatch on length mismatch.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const PdfHistogram& p, const PdfHistogram& q);

/// KL divergence between the joint 2-D histogram of a pair of rows and the
/// product of its marginals. For more than two rows the pairwise values are
/// summed. Fewer than 100 columns adds an InsufficientData diagnostic.
double mutual_information(const Eigen::MatrixXd& rows, std::size_t bins = 64,
                          Diagnostics* diagnostics = nullptr);

struct IcaConfig {
  std::size_t angle_grid = 90;      ///< grid points over [0, 90 degrees)
  std::size_t histogram_bins = 64;  ///< for mutual-information candidate selection
  std::size_t max_sweeps = 12;      ///< Jacobi sweeps when k > 2
  double sweep_tolerance_rad = 1e-5;
};

struct IcaRotation {
  MixingModel model;               ///< unmixing() maps whitened rows to independent rows
  double angle_rad = 0.0;          ///< k == 2: unmixing == [[c, -s], [s, c]]
  std::vector<double> contrast;    ///< k == 2: contrast sampled on the angle grid
  Diagnostics diagnostics;
};

/// Cross-cumulant energy of the pair after rotating it by `angle_rad`.
/// Vanishes when the rotated rows are independent.
double pair_contrast(std::span<const double> x, std::span<const double> y, double angle_rad);

IcaRotation ica_rotation(const Eigen::MatrixXd& whitened, const IcaConfig& config = {});

enum class IsaBasis {
  Temporal,  ///< ICA over the reduced temporal activations
  Spectral,  ///< ICA over the reduced spectral profiles
};

struct IsaConfig {
  std::size_t components = 2;
  Eigen::Index retained = 0;  ///< 0: same as components
  IsaBasis basis = IsaBasis::Temporal;
  spectral::StftConfig stft;
  IcaConfig ica;
};

struct SeparatedStream {
  audio::AudioBuffer audio;
  Eigen::MatrixXd subspace_spectrogram;  ///< spectral_basis * temporal_weights^T
  std::vector<double> temporal_weights;
  std::vector<double> spectral_basis;    ///< unit L2 norm, non-negative sum
  std::size_t component_index = 0;
  double energy = 0.0;                   ///< squared Frobenius norm of the subspace spectrogram
};

struct IsaResult {
  std::vector<SeparatedStream> streams;  ///< descending energy
  /// Projection of the mixture magnitude onto the retained basis; the
  /// subspace spectrograms plus `residual` sum to it.
  Eigen::MatrixXd reduced_magnitude;
  Eigen::MatrixXd residual;
  Diagnostics diagnostics;
};

/// Throws TooShort when the mixture spans fewer than 8 frames.
IsaResult isa_separate(const audio::AudioBuffer& mixture, const IsaConfig& config);
IsaResult isa_separate(const audio::AudioBuffer& mixture, std::size_t components,
                       const spectral::StftConfig& stft_config = {});

}  // namespace tatumkit::separate
