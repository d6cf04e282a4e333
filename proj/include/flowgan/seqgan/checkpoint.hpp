#pragma once

// JSON checkpoints of the full trainer state and a CSV training history.
// Doubles round-trip exactly through the JSON writer, so resuming from a
// checkpoint continues the same parameter trajectory.

#include <fstream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "flowgan/core/error.hpp"
#include "flowgan/seqgan/training.hpp"

namespace flowgan::seqgan {

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json checkpoint_json(const TrainerState& s) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["round"] = s.round;
  j["generator"] = s.gen;
  j["discriminator"] = s.disc;
  j["mle_opt"] = s.mle_opt;
  j["pg_opt"] = s.pg_opt;
  j["disc_opt"] = s.disc_opt;
  j["rng"] = rng_state(s.rng);
  j["mle_history"] = s.mle_history;
  for (const auto& d : s.disc_pretrain_history)
    j["disc_pretrain_history"].push_back({{"loss", d.loss}, {"accuracy", d.accuracy}});
  j["history"] = nlohmann::json::array();
  for (const auto& m : s.history)
    j["history"].push_back({{"round", m.round},
                            {"mean_reward", m.mean_reward},
                            {"pg_grad_norm", m.pg_grad_norm},
                            {"d_loss", m.d_loss},
                            {"d_accuracy", m.d_accuracy},
                            {"heldout_nll", m.heldout_nll}});
  return j;
}

inline TrainerState trainer_from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != kCheckpointVersion) throw Error("unsupported checkpoint version");
  TrainerState s;
  s.round = j.at("round").get<std::size_t>();
  s.gen = j.at("generator").get<Generator>();
  s.disc = j.at("discriminator").get<Discriminator>();
  s.mle_opt = j.at("mle_opt").get<Adam>();
  s.pg_opt = j.at("pg_opt").get<Adam>();
  s.disc_opt = j.at("disc_opt").get<Adam>();
  restore_rng_state(s.rng, j.at("rng").get<std::string>());
  s.mle_history = j.at("mle_history").get<std::vector<double>>();
  if (j.contains("disc_pretrain_history"))
    for (const auto& d : j["disc_pretrain_history"])
      s.disc_pretrain_history.push_back({d.at("loss").get<double>(), d.at("accuracy").get<double>()});
  for (const auto& m : j.at("history"))
    s.history.push_back({m.at("round").get<std::size_t>(), m.at("mean_reward").get<double>(),
                         m.at("pg_grad_norm").get<double>(), m.at("d_loss").get<double>(),
                         m.at("d_accuracy").get<double>(), m.at("heldout_nll").get<double>()});
  return s;
}

inline void save_checkpoint(const TrainerState& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out << checkpoint_json(s).dump() << '\n';
  if (!out) throw IoError("failed writing checkpoint " + path);
}

inline TrainerState load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint ") + path + ": " + e.what(), 0);
  }
  return trainer_from_json(j);
}

inline void write_history_csv(std::ostream& out, const TrainerState& s) {
  out << "round,mean_reward,pg_grad_norm,d_loss,d_accuracy,heldout_nll\n";
  char buf[256];
  for (const auto& m : s.history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.round, m.mean_reward,
                  m.pg_grad_norm, m.d_loss, m.d_accuracy, m.heldout_nll);
    out << buf;
  }
}

}  // namespace flowgan::seqgan
