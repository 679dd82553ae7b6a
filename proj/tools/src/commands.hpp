#pragma once

#include "common.hpp"

namespace ecgtool {

// Each command returns the process exit code (0 success, 1 domain error —
// domain errors normally propagate as ecgbench::Error and are mapped by
// main). Every command writes <out>/<command>-manifest.json.

int run_ingest(const RunConfig& config);
int run_detect(const RunConfig& config);
int run_poincare(const RunConfig& config);
int run_features(const RunConfig& config);

int run_train(const RunConfig& config);
int run_infer(const RunConfig& config);
int run_gradcam(const RunConfig& config);
int run_bench(const RunConfig& config);

int run_boost_train(const RunConfig& config);
int run_boost_predict(const RunConfig& config);
int run_report(const RunConfig& config);

}  // namespace ecgtool
