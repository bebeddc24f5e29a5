#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "canopy/env.hpp"
#include "canopy/mlp.hpp"

namespace canopy {

// Actor 17-64-64-4 (tanh output, actions live in [-1,1]^4), critic 17-64-64-1,
// state-independent per-action log-std for the Gaussian exploration policy.
struct PolicyWeights {
  Mlp actor{std::vector<int>{17, 64, 64, 4}, Mlp::Output::Tanh};
  Mlp critic{std::vector<int>{17, 64, 64, 1}, Mlp::Output::Linear};
  Eigen::Vector4d log_std = Eigen::Vector4d::Constant(std::log(0.3));

  static PolicyWeights init(uint64_t seed) {
    std::mt19937_64 rng(seed);
    PolicyWeights w;
    const double hidden_gain = std::sqrt(2.0);
    w.actor = Mlp::orthogonal({17, 64, 64, 4}, Mlp::Output::Tanh, hidden_gain, 0.01, rng);
    w.critic = Mlp::orthogonal({17, 64, 64, 1}, Mlp::Output::Linear, hidden_gain, 1.0, rng);
    w.log_std = Eigen::Vector4d::Constant(std::log(0.3));
    return w;
  }

  static PolicyWeights zeros() { return PolicyWeights{}; }

  int param_count() const { return actor.param_count() + critic.param_count() + 4; }

  Eigen::VectorXd to_flat() const {
    Eigen::VectorXd flat(param_count());
    actor.flatten_into(flat, 0);
    critic.flatten_into(flat, actor.param_count());
    flat.tail<4>() = log_std;
    return flat;
  }

  void from_flat(const Eigen::VectorXd& flat) {
    if (flat.size() != param_count()) throw std::invalid_argument("PolicyWeights: bad flat size");
    actor.unflatten_from(flat, 0);
    critic.unflatten_from(flat, actor.param_count());
    log_std = flat.tail<4>();
  }

  bool all_finite() const {
    return actor.all_finite() && critic.all_finite() && log_std.allFinite();
  }
};

inline Eigen::Vector4d actor_forward(const Eigen::Matrix<double, 17, 1>& obs,
                                     const PolicyWeights& w) {
  if (!w.actor.all_finite()) throw std::invalid_argument("actor_forward: non-finite weights");
  return w.actor.forward(obs);
}

inline Eigen::Vector4d actor_forward(const Observation& obs, const PolicyWeights& w) {
  return actor_forward(obs.vec, w);
}

inline double critic_forward(const Eigen::Matrix<double, 17, 1>& obs, const PolicyWeights& w) {
  if (!w.critic.all_finite()) throw std::invalid_argument("critic_forward: non-finite weights");
  return w.critic.forward(obs)(0);
}

inline double critic_forward(const Observation& obs, const PolicyWeights& w) {
  return critic_forward(obs.vec, w);
}

// --- serialization -------------------------------------------------------
// JSON, layer order, row-major weight data, shapes carried explicitly.

namespace detail {

inline nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& w = net.weight(l);
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) data.push_back(w(r, c));
    std::vector<double> bias(net.bias(l).data(), net.bias(l).data() + net.bias(l).size());
    layers.push_back({{"rows", w.rows()}, {"cols", w.cols()}, {"weight", data}, {"bias", bias}});
  }
  return layers;
}

inline void mlp_from_json(const nlohmann::json& layers, Mlp& net) {
  if (layers.size() != net.layer_count())
    throw std::runtime_error("weights file: layer count mismatch");
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& jl = layers[l];
    auto& w = net.weight(l);
    if (jl.at("rows").get<Eigen::Index>() != w.rows() ||
        jl.at("cols").get<Eigen::Index>() != w.cols())
      throw std::runtime_error("weights file: layer shape mismatch");
    const auto data = jl.at("weight").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != w.size())
      throw std::runtime_error("weights file: weight size mismatch");
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = data[k++];
    const auto bias = jl.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(bias.size()) != net.bias(l).size())
      throw std::runtime_error("weights file: bias size mismatch");
    for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) net.bias(l)(i) = bias[i];
  }
}

}  // namespace detail

inline void save_weights(const PolicyWeights& w, const std::string& path) {
  nlohmann::json j;
  j["format"] = "canopy-policy-v1";
  j["actor"] = detail::mlp_to_json(w.actor);
  j["critic"] = detail::mlp_to_json(w.critic);
  j["log_std"] = std::vector<double>(w.log_std.data(), w.log_std.data() + 4);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_weights: cannot open " + path);
  out << j.dump(2) << "\n";
}

inline PolicyWeights load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_weights: cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != std::string("canopy-policy-v1"))
    throw std::runtime_error("load_weights: unknown format in " + path);
  PolicyWeights w;
  detail::mlp_from_json(j.at("actor"), w.actor);
  detail::mlp_from_json(j.at("critic"), w.critic);
  const auto ls = j.at("log_std").get<std::vector<double>>();
  if (ls.size() != 4) throw std::runtime_error("load_weights: bad log_std");
  for (int i = 0; i < 4; ++i) w.log_std(i) = ls[i];
  return w;
}

}  // namespace canopy
