#pragma once

namespace tgf {

/// Echoed in the header of every file the project reads or writes.
inline constexpr int kFormatVersion = 1;

}  // namespace tgf
