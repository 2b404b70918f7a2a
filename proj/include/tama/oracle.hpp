#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

#include "tama/core.hpp"
#include "tama/gateway.hpp"

namespace tama {

/// How closely the offline oracle reproduces the ground truth.
struct OracleFidelity {
  enum class Level { perfect, noisy };
  /// Behaviour in the self-reflection stage.
  enum class Reflection {
    echo,           // return the prior detections unchanged
    truth,          // answer as in the analyzing stage
    drop_spurious,  // keep only prior detections that touch a true anomaly
  };

  Level level = Level::perfect;
  std::uint64_t seed = 0;
  /// Noisy only: each endpoint of a true anomaly moves by a uniform offset
  /// in [-jitter, jitter]. The offset depends on the anomaly, not on the
  /// window, so overlapping windows report it consistently.
  std::size_t jitter = 0;
  /// Noisy only: probability that a window reports one spurious detection.
  double fp_rate = 0.0;
  Reflection reflection = Reflection::echo;

  static OracleFidelity perfect() { return {}; }
  static OracleFidelity noisy(std::uint64_t seed, std::size_t jitter, double fp_rate) {
    return {Level::noisy, seed, jitter, fp_rate, Reflection::echo};
  }
};

struct OracleTruth {
  LabelSeries labels;
  /// Optional; when empty, single points are typed Point and runs Shapelet.
  TypeMap types;
};

/// Schema-conformant response for the stage named in the request metadata.
/// Throws ValidationError if the request carries no window placement.
[[nodiscard]] ChatResponse oracle_respond(const ChatRequest& request, const OracleTruth& truth,
                                          const OracleFidelity& fidelity);

/// Deterministic offline stand-in for the model, keyed by series name.
class OracleBackend final : public ChatBackend {
 public:
  explicit OracleBackend(OracleFidelity fidelity) : fidelity_(fidelity) {}

  void add_series(const std::string& name, OracleTruth truth);

  ChatResponse complete(const ChatRequest& request) override;
  [[nodiscard]] std::string id() const override { return "oracle"; }

 private:
  OracleFidelity fidelity_;
  mutable std::mutex mutex_;
  std::map<std::string, OracleTruth, std::less<>> truth_;
};

}  // namespace tama
