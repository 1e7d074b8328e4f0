#pragma once

// Named experiment recipes behind the CLI: each one reproduces a figure or
// table as CSV (plus optional SVG) under an output directory, driven by flat
// key = value parameters.  Recipes are pure functions of (params, seed,
// precision), so a run can be replayed bit-identically from its config echo.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gramlab/numerics.hpp"

namespace gramlab {

struct RecipeContext {
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    Precision precision = Precision::f64;
    bool plots = true;
    std::map<std::string, std::string> params;

    bool has(const std::string& key) const { return params.count(key) != 0; }
    std::string str(const std::string& key, const std::string& def) const;
    long long i64(const std::string& key, long long def) const;
    double dbl(const std::string& key, double def) const;
    std::vector<long long> i64_list(const std::string& key, const std::string& def) const;
    std::vector<double> dbl_list(const std::string& key, const std::string& def) const;
    std::string path(const std::string& file) const;
};

struct Recipe {
    std::string name;
    std::string summary;
    std::vector<std::string> keys;  // recipe-specific config keys
    std::function<void(const RecipeContext&)> run;
};

const std::vector<Recipe>& recipes();
const Recipe* find_recipe(const std::string& name);

// Rejects unknown keys (beyond the recipe's own plus seed/precision/plots),
// then runs.  ConfigError names the offending key.
void run_recipe(const std::string& name, const RecipeContext& ctx);

// Key = value config echo with a version stamp, sufficient for replay.
void write_config_echo(const std::string& file, const std::string& recipe,
                       const RecipeContext& ctx);

// Flat `key = value` file, '#' comments, UTF-8.  ConfigError on syntax.
std::map<std::string, std::string> read_config_file(const std::string& file);

}  // namespace gramlab
