#ifndef DCA_ARTIFACT_HPP
#define DCA_ARTIFACT_HPP

#include <string>

#include <json.hpp>

#include "dca/dynamic_loop.hpp"
#include "dca/interval_models.hpp"

namespace dca {

// ---------------------------------------------------------------------------
// Model persistence: a self-contained JSON document
// ---------------------------------------------------------------------------

inline constexpr int kArtifactFormatVersion = 1;

struct ModelArtifact {
    IntervalEnsemble ensemble;
    std::vector<KindTrace> trace;
    double dc_error = 0.0;
    bool stalled = false;
    bool unstable = false;
    nlohmann::ordered_json config_snapshot;  // resolved run configuration
};

nlohmann::ordered_json artifact_to_json(const ModelArtifact& artifact);
ModelArtifact artifact_from_json(const nlohmann::ordered_json& doc);

void save_artifact(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_artifact(const std::string& path);

}  // namespace dca

#endif  // DCA_ARTIFACT_HPP
