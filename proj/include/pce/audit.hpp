#ifndef PCE_AUDIT_HPP
#define PCE_AUDIT_HPP

#include <string>
#include <vector>

#include "pce/experiment.hpp"

namespace pce {

struct AuditReport {
    bool ok = false;
    std::size_t files_checked = 0;
    std::size_t cesets_checked = 0;
    std::vector<std::string> issues;

    Json to_json() const;
};

// Re-derives every emitted table from the per-base CESet artifacts and the
// serialized models, and verifies checksums against the manifest.
AuditReport audit_run(const std::string& run_dir);

}  // namespace pce

#endif
