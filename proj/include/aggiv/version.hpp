#pragma once

namespace aggiv {

/// Toolkit version, recorded in experiment manifests.
inline constexpr const char* kVersion = "0.1.0";

}  // namespace aggiv
