// Command-line driver: entlab <subcommand> [--config FILE] [flags]
#include "entlab/driver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace entlab;

namespace {

struct Common {
    std::string config;
    std::size_t resolution = 0;
    std::string output_dir;
    bool no_plots = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "YAML experiment config (default: built-in set)");
    cmd->add_option("--resolution", c.resolution, "grid node count, overrides the config");
    cmd->add_option("--output-dir", c.output_dir, "output directory, overrides the config and $ENTLAB_OUTPUT_DIR");
    cmd->add_flag("--no-plots", c.no_plots, "skip SVG output");
    cmd->add_flag("-q,--quiet", c.quiet, "no progress lines");
}

ExperimentConfig configure(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? default_config() : load_config(c.config);
    if (c.resolution) cfg.resolution = c.resolution;
    if (!c.output_dir.empty()) cfg.output_dir = c.output_dir;
    cfg.validate();
    return cfg;
}

int report(const RunSummary& s) {
    for (const auto& f : s.files) std::cout << "wrote " << f << '\n';
    for (const auto& f : s.failures) std::cerr << "FAIL " << f << '\n';
    std::cout << s.asserted << " asserted checks, " << s.failures.size() << " failed\n";
    return s.pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entlab: entropy and Fisher information deficits on grid densities"};
    app.require_subcommand(1);

    Common common;
    auto* functionals = app.add_subcommand("functionals", "write functionals.csv for every distribution");
    auto* poincare = app.add_subcommand("poincare", "write poincare.csv for every distribution");
    auto* sweep = app.add_subcommand("sweep", "deficits over every pair and lambda, with plots");
    auto* verify = app.add_subcommand("verify", "run every selected check and exit nonzero on failure");
    auto* plot = app.add_subcommand("plot", "render SVG plots from the CSV files in the output directory");
    for (auto* cmd : {functionals, poincare, sweep, verify, plot}) add_common(cmd, common);

    auto* deficit = app.add_subcommand("deficit", "one deficit pair at one lambda, printed as CSV");
    std::vector<std::string> pair;
    double lambda = 0.5;
    std::string kind = "both";
    add_common(deficit, common);
    deficit->add_option("--pair", pair, "two distribution names from the config")->expected(2)->required();
    deficit->add_option("--lambda", lambda, "mixing weight in [0, 1]")->required();
    deficit->add_option("--kind", kind, "entropy, information or both")
        ->check(CLI::IsMember({"entropy", "information", "both"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg = configure(common);
        RunOptions opts;
        opts.plots = !common.no_plots;
        if (!common.quiet) opts.log = &std::cerr;
        const std::string dir = output_directory(cfg);

        if (*verify) return report(run(cfg, opts));
        if (*plot) return report(render_plots(dir));

        std::filesystem::create_directories(dir);
        if (*functionals) return report(write_functionals(materialize(cfg), dir));
        if (*poincare) return report(write_poincare(materialize(cfg), dir));
        if (*sweep) {
            RunSummary s = write_deficits(cfg, materialize(cfg), dir, opts);
            if (opts.plots) s.merge(render_plots(dir));
            return report(s);
        }
        if (*deficit) {
            if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("--lambda must lie in [0, 1]");
            cfg.distribution(pair[0]);
            cfg.distribution(pair[1]);
            ExperimentConfig one = cfg;
            one.distributions.clear();
            for (const auto& d : cfg.distributions)
                if (d.name == pair[0] || d.name == pair[1]) one.distributions.push_back(d);
            const auto ds = materialize(one);
            auto get = [&](const std::string& n) -> const GridDensity& {
                for (const auto& d : ds)
                    if (d.name == n) return d.density;
                throw ConfigError("unknown distribution '" + n + "'");
            };
            DeficitOptions o;
            o.convolution.resolution = cfg.resolution;
            std::cout << "d0,d1,lambda,type,deficit,bound,margin,c0,c1,err,bound_asserted,smoothing_time,pass\n";
            bool ok = true;
            for (const auto k : {DeficitKind::entropy, DeficitKind::information}) {
                if (kind != "both" && kind != to_string(k)) continue;
                const DeficitReport r = k == DeficitKind::entropy ? entropy_deficit(get(pair[0]), get(pair[1]), lambda, o)
                                                                  : info_deficit(get(pair[0]), get(pair[1]), lambda, o);
                std::cout << pair[0] << ',' << pair[1] << ',' << csv_number(lambda) << ',' << to_string(k) << ','
                          << csv_number(r.deficit) << ',' << csv_number(r.bound) << ',' << csv_number(r.margin) << ','
                          << csv_number(r.c0) << ',' << csv_number(r.c1) << ',' << csv_number(r.err) << ','
                          << r.bound_asserted << ',' << csv_number(r.smoothing_time) << ',' << r.pass() << '\n';
                ok = ok && r.pass();
            }
            return ok ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CapabilityError& e) {
        std::cerr << "capability error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
