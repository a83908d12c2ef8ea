#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tsr/config.hpp"

namespace tsr {

/// Version reported by the CLI and recorded in run manifests.
std::string version_string();

// Each command returns a process exit code. Scripting output goes to `out`,
// progress and error messages to `err`.

/// Ingest, split, fit; writes the best checkpoint, curves.csv and
/// run_manifest.json.
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Re-creates the split recorded by the checkpoint's seed, evaluates the
/// test part and writes every metrics artifact. Prints `test_accuracy=...`.
int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Prints `path,class_id,class_name,probability` per image.
int cmd_predict(const RunConfig& cfg, const std::vector<std::filesystem::path>& images,
                std::ostream& out, std::ostream& err);

/// Re-renders SVG charts from the CSVs in out_dir.
int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace tsr
