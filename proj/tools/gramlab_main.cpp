// Command-line front end: one subcommand per recipe, plus emit-plot / replay.
//
// Exit codes: 0 success, 2 configuration error, 3 capacity limit,
// 4 numerical failure.  Failures print a JSON object
// {"code", "message", "context"} on stderr.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gramlab/errors.hpp"
#include "gramlab/recipes.hpp"
#include "gramlab/report.hpp"

namespace {

using gramlab::Precision;

int exit_code_for(const std::string& code) {
    if (code == "config" || code == "arg" || code == "domain" || code == "shape" ||
        code == "unsupported_target")
        return 2;
    if (code == "capacity" || code == "resolution") return 3;
    return 4;
}

void report_error(const std::string& code, const std::string& message,
                  const std::string& context) {
    const nlohmann::json j{{"code", code}, {"message", message}, {"context", context}};
    std::cerr << j.dump() << std::endl;
}

int guarded(const std::string& context, const std::function<void()>& fn) {
    try {
        fn();
        return 0;
    } catch (const gramlab::Error& e) {
        report_error(e.code(), e.what(), context);
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        report_error("internal", e.what(), context);
        return 4;
    }
}

Precision parse_precision(const std::string& s) {
    if (s == "f32") return Precision::f32;
    if (s == "f64") return Precision::f64;
    throw gramlab::ConfigError("precision must be f32 or f64 (got '" + s + "')");
}

// Lift the reserved keys out of a raw key = value map into the context.
void absorb_reserved(gramlab::RecipeContext& ctx, std::map<std::string, std::string>& params) {
    if (auto it = params.find("seed"); it != params.end()) {
        try {
            ctx.seed = std::stoull(it->second);
        } catch (const std::exception&) {
            throw gramlab::ConfigError("key 'seed': expected integer, got '" + it->second +
                                       "'");
        }
        params.erase(it);
    }
    if (auto it = params.find("precision"); it != params.end()) {
        ctx.precision = parse_precision(it->second);
        params.erase(it);
    }
    if (auto it = params.find("plots"); it != params.end()) {
        const std::string& v = it->second;
        if (v == "1" || v == "true" || v == "on")
            ctx.plots = true;
        else if (v == "0" || v == "false" || v == "off")
            ctx.plots = false;
        else
            throw gramlab::ConfigError("key 'plots': expected boolean, got '" + v + "'");
        params.erase(it);
    }
}

void prepare_out_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec && !std::filesystem::is_directory(out_dir))
        throw gramlab::ConfigError("cannot create output directory " + out_dir);
}

void run_one(const std::string& recipe, const std::string& config_path,
             const std::string& out_dir, const std::optional<std::uint64_t>& seed,
             const std::optional<std::string>& precision, bool no_plots) {
    gramlab::RecipeContext ctx;
    ctx.out_dir = out_dir;
    ctx.params = gramlab::read_config_file(config_path);
    absorb_reserved(ctx, ctx.params);
    if (seed) ctx.seed = *seed;
    if (precision) ctx.precision = parse_precision(*precision);
    if (no_plots) ctx.plots = false;
    prepare_out_dir(out_dir);
    gramlab::write_config_echo(ctx.path("config_echo.cfg"), recipe, ctx);
    gramlab::run_recipe(recipe, ctx);
}

void run_replay(const std::string& echo_path, const std::string& out_dir) {
    auto params = gramlab::read_config_file(echo_path);
    auto take = [&params](const char* key) {
        auto it = params.find(key);
        if (it == params.end())
            throw gramlab::ConfigError(std::string("config echo missing key '") + key + "'");
        std::string v = it->second;
        params.erase(it);
        return v;
    };
    const std::string version = take("version");
    if (version != GRAMLAB_VERSION)
        throw gramlab::ConfigError("config echo version " + version +
                                   " does not match binary version " GRAMLAB_VERSION);
    const std::string recipe = take("recipe");
    gramlab::RecipeContext ctx;
    ctx.out_dir = out_dir;
    ctx.params = std::move(params);
    absorb_reserved(ctx, ctx.params);
    prepare_out_dir(out_dir);
    gramlab::write_config_echo(ctx.path("config_echo.cfg"), recipe, ctx);
    gramlab::run_recipe(recipe, ctx);
}

struct RecipeArgs {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> precision;
    bool no_plots = false;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gramlab: spectra, fits, training dynamics and Rashomon sets of shallow "
                 "networks"};
    app.set_version_flag("--version", std::string(GRAMLAB_VERSION));
    app.require_subcommand(1);

    std::map<std::string, std::shared_ptr<RecipeArgs>> rargs;
    for (const auto& r : gramlab::recipes()) {
        auto args = std::make_shared<RecipeArgs>();
        CLI::App* sub = app.add_subcommand(r.name, r.summary);
        sub->add_option("--config", args->config, "flat key = value config file")->required();
        sub->add_option("--out", args->out, "output directory");
        sub->add_option("--seed", args->seed, "override the config seed");
        sub->add_option("--precision", args->precision, "override the working precision")
            ->check(CLI::IsMember({"f32", "f64"}));
        sub->add_flag("--no-plots", args->no_plots, "skip SVG output");
        rargs[r.name] = args;
    }

    std::string plot_csv, plot_svg, plot_kind = "line";
    CLI::App* plot = app.add_subcommand("emit-plot", "render a CSV file as a standalone SVG");
    plot->add_option("csv", plot_csv, "input CSV")->required();
    plot->add_option("svg", plot_svg, "output SVG")->required();
    plot->add_option("--kind", plot_kind, "loglog | line | scatter")
        ->check(CLI::IsMember({"loglog", "line", "scatter"}));

    std::string echo_path, replay_out = ".";
    CLI::App* rep = app.add_subcommand("replay", "re-run a recipe from its config echo");
    rep->add_option("echo", echo_path, "config echo written by a previous run")->required();
    rep->add_option("--out", replay_out, "output directory");

    CLI::App* list = app.add_subcommand("list", "list the available recipes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("config", e.what(), "argument parsing");
        return 2;
    }

    if (list->parsed()) {
        for (const auto& r : gramlab::recipes())
            std::printf("%-20s %s\n", r.name.c_str(), r.summary.c_str());
        return 0;
    }
    if (plot->parsed()) {
        return guarded("emit-plot " + plot_csv, [&] {
            gramlab::emit_plot(plot_csv, plot_svg, gramlab::parse_plot_kind(plot_kind));
        });
    }
    if (rep->parsed()) {
        return guarded("replay " + echo_path, [&] { run_replay(echo_path, replay_out); });
    }
    for (const auto& r : gramlab::recipes()) {
        if (!app.get_subcommand(r.name)->parsed()) continue;
        const RecipeArgs& a = *rargs[r.name];
        return guarded("recipe " + r.name, [&] {
            run_one(r.name, a.config, a.out, a.seed, a.precision, a.no_plots);
        });
    }
    return 0;
}
