#pragma once

#include <filesystem>

#include "shadeloss/corpus.hpp"

namespace shadeloss::testing {

/// Default-grid corpus fitted once per test binary.
const ClearSkyCorpus& default_corpus();

/// Fresh empty directory under the system temp directory.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace shadeloss::testing
