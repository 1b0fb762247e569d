#pragma once

#include "model.hpp"
#include "rng.hpp"

#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

namespace seemax {

struct Dims {
  int n_a = 4;  // Alice transmit antennas
  int m_a = 4;  // Alice receive antennas
  int n_b = 4;  // Bob transmit antennas
  int m_b = 4;  // Bob receive antennas
  int m_e = 4;  // Eve receive antennas
};

struct Geometry {
  double d_ab = 1.0;
  double d_ae = 1.0;
  double d_be = 1.0;

  static Geometry triangle(double side = 1.0) {
    if (side <= 0.0) throw std::invalid_argument("Geometry: side must be positive");
    return Geometry{side, side, side};
  }

  // Alice at 0, Bob at ab_distance, Eve on the segment in between.
  static Geometry line(double eve_pos, double ab_distance = 100.0) {
    if (!(eve_pos > 0.0 && eve_pos < ab_distance))
      throw std::invalid_argument("Geometry: eve_pos must lie strictly between the nodes");
    return Geometry{ab_distance, eve_pos, ab_distance - eve_pos};
  }
};

struct ChannelGenConfig {
  double rho_bar = 1e-2;   // distance-1 path gain
  Geometry geom{};
  double rho_si = 1.0;     // self-interference strength
  double k_rician = 10.0;  // Rician factor of the self-interference channels
  Dims dims{};
  std::uint64_t seed = 0;
};

// Entrywise i.i.d. CN(0, variance).
inline cmat gen_rayleigh(int rows, int cols, double variance, Rng& rng) {
  cmat h(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) h(i, j) = rng.cnormal(variance);
  return h;
}

// Rician self-interference channel: all-ones mean of strength
// sqrt(rho_si K / (1 + K)) plus i.i.d. CN(0, rho_si / (1 + K)).
inline cmat gen_rician_si(int rows, int cols, double rho_si, double k_rician,
                          Rng& rng) {
  const double mean = std::sqrt(rho_si * k_rician / (1.0 + k_rician));
  const double var = rho_si / (1.0 + k_rician);
  cmat h(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) h(i, j) = cplx(mean, 0.0) + rng.cnormal(var);
  return h;
}

namespace stream_tag {
inline constexpr std::uint64_t h_ab = 1;
inline constexpr std::uint64_t h_ae = 2;
inline constexpr std::uint64_t h_be = 3;
inline constexpr std::uint64_t h_bb = 4;
inline constexpr std::uint64_t h_ba = 5;
inline constexpr std::uint64_t h_aa = 6;
inline constexpr std::uint64_t eve_realization = 7;
}  // namespace stream_tag

// One full channel realization. Each matrix is drawn from its own stream, so
// requesting the bidirectional extras never changes the unidirectional draws.
inline ChannelSet gen_channel_set(const ChannelGenConfig& cfg,
                                  bool bidirectional = false) {
  const auto& d = cfg.dims;
  const double rho_ab = cfg.rho_bar / (cfg.geom.d_ab * cfg.geom.d_ab);
  const double rho_ae = cfg.rho_bar / (cfg.geom.d_ae * cfg.geom.d_ae);
  const double rho_be = cfg.rho_bar / (cfg.geom.d_be * cfg.geom.d_be);
  ChannelSet ch;
  {
    Rng r = Rng::stream(cfg.seed, {stream_tag::h_ab});
    ch.h_ab = gen_rayleigh(d.m_b, d.n_a, rho_ab, r);
  }
  {
    Rng r = Rng::stream(cfg.seed, {stream_tag::h_ae});
    ch.h_ae = gen_rayleigh(d.m_e, d.n_a, rho_ae, r);
  }
  {
    Rng r = Rng::stream(cfg.seed, {stream_tag::h_be});
    ch.h_be = gen_rayleigh(d.m_e, d.n_b, rho_be, r);
  }
  {
    Rng r = Rng::stream(cfg.seed, {stream_tag::h_bb});
    ch.h_bb = gen_rician_si(d.m_b, d.n_b, cfg.rho_si, cfg.k_rician, r);
  }
  if (bidirectional) {
    Rng r1 = Rng::stream(cfg.seed, {stream_tag::h_ba});
    ch.h_ba = gen_rayleigh(d.m_a, d.n_b, rho_ab, r1);
    Rng r2 = Rng::stream(cfg.seed, {stream_tag::h_aa});
    ch.h_aa = gen_rician_si(d.m_a, d.n_a, cfg.rho_si, cfg.k_rician, r2);
  }
  return ch;
}

struct EveRealization {
  cmat h_ae;
  cmat h_be;
};

// Statistical-CSI sample set for the eavesdropper links. `base` carries the
// known mean channels in h_ae/h_be; every realization i adds the correlated
// error sqrt(rho) D H_bar_i with D all-ones.
struct Ensemble {
  ChannelSet base;
  std::vector<EveRealization> realizations;
  std::set<int> g_c1;
};

inline Ensemble gen_statistical_eve(const ChannelGenConfig& cfg,
                                    int n_realizations,
                                    bool bidirectional = false) {
  if (n_realizations <= 0)
    throw std::invalid_argument("gen_statistical_eve: need at least one realization");
  const auto& d = cfg.dims;
  const double rho_ae = cfg.rho_bar / (cfg.geom.d_ae * cfg.geom.d_ae);
  const double rho_be = cfg.rho_bar / (cfg.geom.d_be * cfg.geom.d_be);
  Ensemble ens;
  ens.base = gen_channel_set(cfg, bidirectional);
  cmat est_ae, est_be;
  {
    Rng r = Rng::stream(cfg.seed, {stream_tag::h_ae});
    est_ae = gen_rayleigh(d.m_e, d.n_a, 1.0, r);
    ens.base.h_ae = std::sqrt(rho_ae) * est_ae;
  }
  {
    Rng r = Rng::stream(cfg.seed, {stream_tag::h_be});
    est_be = gen_rayleigh(d.m_e, d.n_b, 1.0, r);
    ens.base.h_be = std::sqrt(rho_be) * est_be;
  }
  const cmat corr = cmat::Ones(d.m_e, d.m_e);
  ens.realizations.reserve(static_cast<std::size_t>(n_realizations));
  for (int i = 0; i < n_realizations; ++i) {
    Rng r = Rng::stream(cfg.seed, {stream_tag::eve_realization,
                                   static_cast<std::uint64_t>(i)});
    EveRealization er;
    cmat bar_ae = gen_rayleigh(d.m_e, d.n_a, 1.0, r);
    cmat bar_be = gen_rayleigh(d.m_e, d.n_b, 1.0, r);
    er.h_ae = std::sqrt(rho_ae) * (corr * bar_ae + est_ae);
    er.h_be = std::sqrt(rho_be) * (corr * bar_be + est_be);
    ens.realizations.push_back(std::move(er));
  }
  return ens;
}

// Channel set of realization i (mean channels replaced by the sampled ones).
inline ChannelSet ensemble_channels(const Ensemble& ens, int i) {
  ChannelSet ch = ens.base;
  ch.h_ae = ens.realizations.at(static_cast<std::size_t>(i)).h_ae;
  ch.h_be = ens.realizations.at(static_cast<std::size_t>(i)).h_be;
  return ch;
}

}  // namespace seemax
