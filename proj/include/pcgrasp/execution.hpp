#pragma once

namespace pcgrasp {

/// Selects between the serial reference path and the OpenMP path of a
/// data-parallel kernel. Both produce identical results; the serial path is
/// what tests compare against and what single-thread benchmarks run.
enum class Execution { serial, parallel };

}  // namespace pcgrasp
