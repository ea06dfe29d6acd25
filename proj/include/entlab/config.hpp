#pragma once

#include "entlab/error.hpp"
#include "entlab/family.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace entlab {

/// Malformed or invalid experiment configuration. The message names the
/// field and, when known, the source line.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A named input distribution. By default it is isotropized; a positive
/// `smooth` applies that much OU flow afterwards.
struct DistributionEntry {
    std::string name;
    FamilySpec spec;
    bool isotropize = true;
    double smooth = 0.0;
};

struct CheckSet {
    bool functionals = true;
    bool deficits = true;
    bool lemmas = true;
    bool poincare = true;
};

struct ExperimentConfig {
    std::vector<DistributionEntry> distributions;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<double> lambda_grid;
    std::vector<double> t_grid;
    std::size_t resolution = 4096;
    std::string output_dir; // empty: $ENTLAB_OUTPUT_DIR, then "entlab-out"
    CheckSet checks;

    /// Invariants that flags can break after parsing: unique names, known
    /// pair members, nonempty grids, lambda in [0, 1], t >= 0, resolution >= 256.
    void validate() const;
    const DistributionEntry& distribution(std::string_view name) const;
};

/// Parses YAML text. `source` prefixes error messages ("file.yaml:12: ...").
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

/// The built-in verification set.
ExperimentConfig default_config();
std::string default_config_yaml();

} // namespace entlab
