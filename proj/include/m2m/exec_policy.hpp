#pragma once

namespace m2m {

/// Selects between the serial reference kernel and its OpenMP counterpart.
/// Both produce identical results; the serial path is what the tests pin.
enum class ExecPolicy { Serial, Parallel };

}  // namespace m2m
