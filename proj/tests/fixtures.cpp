#include "fixtures.hpp"

namespace shadeloss::testing {

const ClearSkyCorpus& default_corpus() {
    static const ClearSkyCorpus corpus = [] {
        const CorpusGrid grid;
        const ClearSkyParams params;
        ClearSkyCorpus c = fit_corpus(generate_corpus(grid, params).rows, 6);
        c.grid = grid;
        c.params = params;
        return c;
    }();
    return corpus;
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("shadeloss_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace shadeloss::testing
