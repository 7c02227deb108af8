// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>
#include <string>

#include "tatumkit/separate.hpp"

namespace tatumkit::separate {

namespace {

constexpr Eigen::Index kMinFrames = 8;

audio::AudioBuffer trimmed(const audio::AudioBuffer& padded, std::size_t offset, std::size_t length) {
  const auto src = padded.channel(0);
  std::vector<double> out(length, 0.0);
  for (std::size_t i = 0; i < length && offset + i < src.size(); ++i) out[i] = src[offset + i];
  return audio::AudioBuffer(std::move(out), padded.sample_rate());
}

SeparatedStream silent_stream(std::size_t index, std::size_t length, std::uint32_t rate,
                              Eigen::Index bins, Eigen::Index frames) {
  SeparatedStream s;
  s.audio = audio::AudioBuffer(std::vector<double>(length, 0.0), rate);
  s.subspace_spectrogram = Eigen::MatrixXd::Zero(bins, frames);
  s.temporal_weights.assign(static_cast<std::size_t>(frames), 0.0);
  s.spectral_basis.assign(static_cast<std::size_t>(bins), 0.0);
  s.component_index = index;
  return s;
}

}  // namespace

IsaResult isa_separate(const audio::AudioBuffer& mixture, const IsaConfig& config) {
  if (mixture.channel_count() != 1) {
    throw Error(ErrorCode::InvalidArgument, "ISA expects a mono mixture");
  }
  if (config.components < 1) throw Error(ErrorCode::InvalidArgument, "components must be >= 1");
  spectral::validate(config.stft);

  const std::size_t length = mixture.frames();
  if (static_cast<Eigen::Index>(spectral::frame_count(length, config.stft)) < kMinFrames ||
      length < config.stft.window_length) {
    throw Error(ErrorCode::TooShort, "mixture spans fewer than " + std::to_string(kMinFrames) +
                                         " analysis frames");
  }

  // Pad both ends so every original sample lies under a full frame overlap.
  const std::size_t pad = config.stft.window_length - config.stft.hop;
  std::vector<double> padded(length + 2 * pad, 0.0);
  const auto src = mixture.channel(0);
  std::copy(src.begin(), src.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));

  const spectral::Spectrogram spec = spectral::stft(padded, mixture.sample_rate(), config.stft);
  const Eigen::MatrixXd mag = spectral::magnitude(spec);
  const Eigen::Index bins = mag.rows();
  const Eigen::Index frames = mag.cols();

  IsaResult result;
  const std::size_t components = config.components;

  if (mag.squaredNorm() == 0.0) {
    for (std::size_t c = 0; c < components; ++c) {
      result.streams.push_back(silent_stream(c, length, mixture.sample_rate(), bins, frames));
    }
    result.reduced_magnitude = Eigen::MatrixXd::Zero(bins, frames);
    result.residual = result.reduced_magnitude;
    return result;
  }

  if (components == 1) {
    // Nothing to un-mix: the single stream is the mixture itself.
    SeparatedStream s;
    s.audio = mixture;
    s.subspace_spectrogram = mag;
    Eigen::VectorXd profile = mag.rowwise().sum();
    const double norm = profile.norm();
    if (norm > 0.0) profile /= norm;
    s.spectral_basis.assign(profile.data(), profile.data() + profile.size());
    const Eigen::VectorXd weights = mag.transpose() * profile;
    s.temporal_weights.assign(weights.data(), weights.data() + weights.size());
    s.component_index = 0;
    s.energy = mag.squaredNorm();
    result.streams.push_back(std::move(s));
    result.reduced_magnitude = mag;
    result.residual = Eigen::MatrixXd::Zero(bins, frames);
    return result;
  }

  Eigen::Index retained = config.retained > 0 ? config.retained : static_cast<Eigen::Index>(components);
  if (retained < static_cast<Eigen::Index>(components)) {
    throw Error(ErrorCode::InvalidArgument, "retained rank must be at least the component count");
  }

  // Rows of `data` are variables, columns observations. In the temporal
  // variant the variables are frequency bins, so whitened rows are temporal
  // activations.
  const bool temporal = config.basis == IsaBasis::Temporal;
  const Eigen::MatrixXd data = temporal ? mag : Eigen::MatrixXd(mag.transpose());
  retained = std::min(retained, std::min(data.rows(), data.cols()));

  WhiteningResult white = whiten(data, retained);
  result.diagnostics.insert(result.diagnostics.end(), white.diagnostics.begin(),
                            white.diagnostics.end());
  const Eigen::Index rank = white.retained;

  Eigen::MatrixXd unmixing = Eigen::MatrixXd::Identity(rank, rank);
  if (rank >= 2) {
    IcaRotation ica = ica_rotation(white.whitened, config.ica);
    result.diagnostics.insert(result.diagnostics.end(), ica.diagnostics.begin(),
                              ica.diagnostics.end());
    unmixing = ica.model.unmixing();
  }

  // data ~= loadings * activations with activations = W P data and
  // loadings = P^+ W^T; their product is the projection onto the basis.
  Eigen::MatrixXd activations = unmixing * white.whitening * data;
  Eigen::MatrixXd loadings = white.dewhitening * unmixing.transpose();

  struct Component {
    Eigen::VectorXd spectral;
    Eigen::VectorXd temporal;
    Eigen::MatrixXd spectrogram;
    double energy = 0.0;
  };
  std::vector<Component> parts(static_cast<std::size_t>(rank));
  for (Eigen::Index c = 0; c < rank; ++c) {
    Eigen::VectorXd load = loadings.col(c);
    Eigen::VectorXd act = activations.row(c).transpose();
    Component& part = parts[static_cast<std::size_t>(c)];
    part.spectral = temporal ? load : act;
    part.temporal = temporal ? act : load;
    const double norm = part.spectral.norm();
    if (norm > 0.0) {
      part.spectral /= norm;
      part.temporal *= norm;
    }
    if (part.spectral.sum() < 0.0) {
      part.spectral = -part.spectral;
      part.temporal = -part.temporal;
    }
    part.spectrogram = part.spectral * part.temporal.transpose();
    part.energy = part.spectrogram.squaredNorm();
  }

  std::vector<std::size_t> order(parts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return parts[a].energy > parts[b].energy; });

  result.reduced_magnitude = Eigen::MatrixXd::Zero(bins, frames);
  for (const auto& part : parts) result.reduced_magnitude += part.spectrogram;
  result.residual = Eigen::MatrixXd::Zero(bins, frames);

  for (std::size_t slot = 0; slot < order.size(); ++slot) {
    Component& part = parts[order[slot]];
    if (slot >= components) {
      result.residual += part.spectrogram;
      continue;
    }
    SeparatedStream s;
    s.component_index = slot;
    s.energy = part.energy;
    s.spectral_basis.assign(part.spectral.data(), part.spectral.data() + part.spectral.size());
    s.temporal_weights.assign(part.temporal.data(), part.temporal.data() + part.temporal.size());
    const Eigen::MatrixXd nonneg = part.spectrogram.cwiseMax(0.0);
    const audio::AudioBuffer resynth = spectral::istft(spectral::with_magnitude(spec, nonneg));
    s.audio = trimmed(resynth, pad, length);
    s.subspace_spectrogram = std::move(part.spectrogram);
    result.streams.push_back(std::move(s));
  }

  for (std::size_t c = result.streams.size(); c < components; ++c) {
    result.streams.push_back(silent_stream(c, length, mixture.sample_rate(), bins, frames));
  }
  if (static_cast<std::size_t>(rank) < components) {
    result.diagnostics.push_back({ErrorCode::RankDeficient,
                                  "only " + std::to_string(rank) +
                                      " independent components available; remaining streams are silent"});
  }
  return result;
}

IsaResult isa_separate(const audio::AudioBuffer& mixture, std::size_t components,
                       const spectral::StftConfig& stft_config) {
  IsaConfig config;
  config.components = components;
  config.stft = stft_config;
  return isa_separate(mixture, config);
}

}  // namespace tatumkit::separate
