#include "entlab/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace entlab {

namespace fs = std::filesystem;

namespace {

constexpr double fd_step = 0.01; // t step of the flow derivative checks

std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

// Quotes a text cell if it holds a comma or quote.
std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::string flag(bool b) { return b ? "1" : "0"; }

class CsvFile {
public:
    CsvFile(const std::string& dir, const std::string& name, const std::vector<std::string>& header)
        : path_((fs::path(dir) / name).string()), out_(path_) {
        if (!out_) throw Error("cannot write " + path_);
        out_ << join(header) << '\n';
    }
    void row(const std::vector<std::string>& cells) { out_ << join(cells) << '\n'; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
};

void say(const RunOptions& opts, const std::string& line) {
    if (opts.log) *opts.log << line << std::endl;
}

const GridDensity& find(const std::vector<NamedDensity>& ds, const std::string& name) {
    for (const auto& d : ds)
        if (d.name == name) return d.density;
    throw ConfigError("unknown distribution '" + name + "'");
}

std::vector<double> interior(const std::vector<double>& lambdas) {
    std::vector<double> out;
    for (double l : lambdas)
        if (l > 0.0 && l < 1.0) out.push_back(l);
    return out;
}

std::vector<double> flow_times(const std::vector<double>& ts) {
    std::vector<double> out;
    for (double t : ts)
        if (t >= fd_step) out.push_back(t);
    return out;
}

void record(RunSummary& s, const LemmaReport& r) {
    for (const auto& c : r.checks) {
        if (!c.asserted) continue;
        ++s.asserted;
        if (!c.pass)
            s.failures.push_back("lemma " + std::string(to_string(r.id)) + " [" + r.subject + "] " +
                                 c.name + ": margin " + csv_number(c.margin) + " < -" +
                                 csv_number(c.tolerance));
    }
}

void write_checks(CsvFile& csv, const LemmaReport& r) {
    for (const auto& c : r.checks)
        csv.row({std::string(to_string(r.id)), cell(r.subject), cell(c.name), csv_number(c.lhs),
                 csv_number(c.rhs), csv_number(c.margin), csv_number(c.tolerance), flag(c.asserted),
                 flag(c.pass), flag(r.pass), csv_number(r.worst_margin)});
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

struct Table {
    std::map<std::string, std::size_t> column;
    std::vector<std::vector<std::string>> rows;
    const std::string& at(std::size_t r, const std::string& name) const { return rows[r].at(column.at(name)); }
    double num(std::size_t r, const std::string& name) const { return std::strtod(at(r, name).c_str(), nullptr); }
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    Table t;
    std::string line;
    std::getline(in, line);
    const auto header = split_csv_line(line);
    for (std::size_t i = 0; i < header.size(); ++i) t.column[header[i]] = i;
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split_csv_line(line));
    return t;
}

std::string file_stem(const std::string& s) {
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

void RunSummary::merge(const RunSummary& other) {
    asserted += other.asserted;
    failures.insert(failures.end(), other.failures.begin(), other.failures.end());
    files.insert(files.end(), other.files.begin(), other.files.end());
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string output_directory(const ExperimentConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("ENTLAB_OUTPUT_DIR"); env && *env) return env;
    return "entlab-out";
}

std::vector<NamedDensity> materialize(const ExperimentConfig& cfg) {
    std::vector<NamedDensity> out;
    GridHint hint;
    hint.count = cfg.resolution;
    ConvolutionOptions conv;
    conv.resolution = cfg.resolution;
    for (const auto& e : cfg.distributions) {
        GridDensity d = build_density(e.spec, hint);
        if (e.isotropize) d = isotropize(d);
        if (e.smooth > 0.0) d = ou_evolve(d, e.smooth, conv);
        out.push_back({e.name, std::move(d)});
    }
    return out;
}

RunSummary write_functionals(const std::vector<NamedDensity>& ds, const std::string& dir) {
    static const char* fields[] = {"ent_L", "fisher_L", "rel_entropy", "rel_fisher", "k_L", "k_gauss", "m_gauss"};
    using F = FunctionalReport::Fields<double>;
    static double F::*members[] = {&F::ent_L, &F::fisher_L, &F::rel_entropy, &F::rel_fisher,
                                   &F::k_L, &F::k_gauss, &F::m_gauss};
    std::vector<std::string> header = {"name", "label", "isotropic", "log_concave"};
    for (const char* f : fields) {
        header.push_back(f);
        header.push_back(std::string(f) + "_err");
        header.push_back(std::string(f) + "_trunc");
    }
    for (const char* f : {"entropy_identity", "fisher_identity", "k_identity"}) {
        header.push_back(f);
        header.push_back(std::string(f) + "_err");
    }
    header.push_back("k_identity_resolved");
    CsvFile csv(dir, "functionals.csv", header);
    RunSummary s;
    for (const auto& nd : ds) {
        const FunctionalReport r = compute_functionals(nd.density);
        // the report keeps values in plain members; view them through Fields
        F values{r.ent_L, r.fisher_L, r.rel_entropy, r.rel_fisher, r.k_L, r.k_gauss, r.m_gauss};
        std::vector<std::string> row = {cell(nd.name), cell(nd.density.label()), flag(r.isotropic),
                                        flag(nd.density.log_concave())};
        for (auto m : members) {
            row.push_back(csv_number(values.*m));
            row.push_back(csv_number(r.err.*m));
            row.push_back(csv_number(r.trunc.*m));
        }
        row.push_back(csv_number(r.entropy_identity));
        row.push_back(csv_number(r.entropy_identity_err));
        row.push_back(csv_number(r.fisher_identity));
        row.push_back(csv_number(r.fisher_identity_err));
        row.push_back(csv_number(r.k_identity));
        row.push_back(csv_number(r.k_identity_err));
        row.push_back(flag(r.k_identity_resolved));
        csv.row(row);
        if (r.isotropic) {
            // identities hold to the acceptance thresholds or to 10x their own budget
            auto check = [&](const char* what, double res, double err, double threshold, bool finite) {
                if (!finite) return;
                ++s.asserted;
                if (!(std::abs(res) <= std::max(threshold, 10.0 * err)))
                    s.failures.push_back("functionals [" + nd.name + "] " + what + " residual " + csv_number(res));
            };
            check("entropy identity", r.entropy_identity, r.entropy_identity_err, 1e-6, r.finite.rel_entropy);
            check("fisher identity", r.fisher_identity, r.fisher_identity_err, 1e-6, r.finite.rel_fisher);
            check("k identity", r.k_identity, r.k_identity_err, 1e-5, r.finite.k_gauss);
        }
    }
    s.files.push_back(csv.path());
    return s;
}

RunSummary write_poincare(const std::vector<NamedDensity>& ds, const std::string& dir) {
    CsvFile csv(dir, "poincare.csv",
                {"name", "label", "c", "gap", "residual", "refinement_ratio", "log_concave", "warnings"});
    RunSummary s;
    for (const auto& nd : ds) {
        const PoincareEstimate p = poincare_constant(nd.density);
        std::string warn;
        for (const auto& w : p.warnings) warn += (warn.empty() ? "" : "; ") + w;
        csv.row({cell(nd.name), cell(nd.density.label()), csv_number(p.c), csv_number(p.gap),
                 csv_number(p.residual), csv_number(p.refinement_ratio), flag(nd.density.log_concave()),
                 cell(warn)});
        s.asserted += 2;
        if (!(p.residual <= 1e-8))
            s.failures.push_back("poincare [" + nd.name + "] residual " + csv_number(p.residual));
        if (!(p.refinement_ratio >= 0.999 && p.refinement_ratio <= 1.001))
            s.failures.push_back("poincare [" + nd.name + "] refinement ratio " + csv_number(p.refinement_ratio));
    }
    s.files.push_back(csv.path());
    return s;
}

RunSummary write_deficits(const ExperimentConfig& cfg, const std::vector<NamedDensity>& ds,
                          const std::string& dir, const RunOptions& opts) {
    CsvFile csv(dir, "deficits.csv",
                {"d0", "d1", "lambda", "type", "deficit", "bound", "margin", "c0", "c1", "err",
                 "bound_asserted", "smoothing_time", "pass"});
    RunSummary s;
    DeficitOptions o;
    o.convolution.resolution = cfg.resolution;
    for (const auto& [a, b] : cfg.pairs) {
        say(opts, "deficits " + a + " | " + b);
        const GridDensity& d0 = find(ds, a);
        const GridDensity& d1 = find(ds, b);
        for (double l : cfg.lambda_grid) {
            for (const auto kind : {DeficitKind::entropy, DeficitKind::information}) {
                const DeficitReport r = kind == DeficitKind::entropy ? entropy_deficit(d0, d1, l, o)
                                                                     : info_deficit(d0, d1, l, o);
                csv.row({cell(a), cell(b), csv_number(l), std::string(to_string(kind)),
                         csv_number(r.deficit), csv_number(r.bound), csv_number(r.margin),
                         csv_number(r.c0), csv_number(r.c1), csv_number(r.err), flag(r.bound_asserted),
                         csv_number(r.smoothing_time), flag(r.pass())});
                s.asserted += r.bound_asserted ? 2 : 1;
                if (!r.pass())
                    s.failures.push_back("deficit " + std::string(to_string(kind)) + " (" + a + ", " + b +
                                         ") lambda=" + csv_number(l) + ": deficit " + csv_number(r.deficit) +
                                         ", bound " + csv_number(r.bound) + ", err " + csv_number(r.err));
            }
        }
    }
    s.files.push_back(csv.path());
    return s;
}

RunSummary write_lemmas(const ExperimentConfig& cfg, const std::vector<NamedDensity>& ds,
                        const std::string& dir, const RunOptions& opts) {
    CsvFile csv(dir, "lemmas.csv",
                {"lemma", "subject", "check", "lhs", "rhs", "margin", "tolerance", "asserted", "pass",
                 "report_pass", "worst_margin"});
    CsvFile flow(dir, "flow.csv", {"name", "t", "info", "decay_rhs", "ent_ratio", "info_ratio"});
    RunSummary s;
    DeficitOptions o;
    o.convolution.resolution = cfg.resolution;
    const std::vector<double> z_nodes = {-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0};
    const std::vector<double> ts = flow_times(cfg.t_grid);
    auto emit = [&](const LemmaReport& r) {
        write_checks(csv, r);
        record(s, r);
    };

    for (const auto& [a, b] : cfg.pairs) {
        say(opts, "lemmas " + a + " | " + b);
        const GridDensity& d0 = find(ds, a);
        const GridDensity& d1 = find(ds, b);
        const bool smooth = d0.capability().smooth && d1.capability().smooth;
        const bool k = d0.capability().k && d1.capability().k;
        const bool fisher = d0.capability().fisher && d1.capability().fisher;
        const bool iso = is_isotropic(d0) && is_isotropic(d1);
        for (double l : interior(cfg.lambda_grid)) {
            if (smooth) emit(lemma_conditional_hessian(d0, d1, l, z_nodes, o));
            if (k) emit(lemma_klebesgue(d0, d1, l, o));
            if (k && iso) emit(lemma_l_and_l2(d0, d1, l, o));
            if (!ts.empty()) emit(last_lemma_check(d0, d1, l, ts, fd_step, o));
        }
        if (fisher && iso) emit(flow_integral_check(d0, d1, 0.5, o).lemma);
    }
    for (const auto& nd : ds) {
        if (!is_isotropic(nd.density)) continue;
        say(opts, "flow " + nd.name);
        if (!ts.empty()) {
            const DebruijnReport r = debruijn_check(nd.density, ts, fd_step, o);
            emit(r.lemma);
            for (const auto& p : r.points)
                flow.row({cell(nd.name), csv_number(p.t), csv_number(p.info), csv_number(p.decay_rhs),
                          csv_number(p.ent_ratio), csv_number(p.info_ratio)});
        }
        emit(bbn_1d_check(nd.density, o));
    }
    s.files.push_back(csv.path());
    s.files.push_back(flow.path());
    return s;
}

RunSummary render_plots(const std::string& dir) {
    RunSummary s;
    const std::string def_path = (fs::path(dir) / "deficits.csv").string();
    if (fs::exists(def_path)) {
        const Table t = read_table(def_path);
        std::vector<std::pair<std::string, std::string>> pairs;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const std::pair<std::string, std::string> p{t.at(r, "d0"), t.at(r, "d1")};
            if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(p);
        }
        for (const auto& [a, b] : pairs) {
            std::vector<Series> series;
            for (const char* kind : {"entropy", "information"}) {
                Series def{std::string(kind) + " deficit", {}, {}};
                Series bnd{std::string(kind) + " bound", {}, {}};
                for (std::size_t r = 0; r < t.rows.size(); ++r) {
                    if (t.at(r, "d0") != a || t.at(r, "d1") != b || t.at(r, "type") != kind) continue;
                    def.x.push_back(t.num(r, "lambda"));
                    def.y.push_back(t.num(r, "deficit"));
                    if (std::isfinite(t.num(r, "bound"))) {
                        bnd.x.push_back(t.num(r, "lambda"));
                        bnd.y.push_back(t.num(r, "bound"));
                    }
                }
                series.push_back(def);
                if (!bnd.x.empty()) series.push_back(bnd);
            }
            const std::string path = (fs::path(dir) / ("deficit_" + file_stem(a) + "__" + file_stem(b) + ".svg")).string();
            write_svg_plot(path, a + " | " + b, "lambda", "deficit", series);
            s.files.push_back(path);
        }
    }
    const std::string flow_path = (fs::path(dir) / "flow.csv").string();
    if (fs::exists(flow_path)) {
        const Table t = read_table(flow_path);
        std::vector<std::string> names;
        for (std::size_t r = 0; r < t.rows.size(); ++r)
            if (std::find(names.begin(), names.end(), t.at(r, "name")) == names.end()) names.push_back(t.at(r, "name"));
        for (const auto& n : names) {
            Series info{"I(X_t)", {}, {}};
            Series decay{"exp(-2t) I(X_0)", {}, {}};
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                if (t.at(r, "name") != n) continue;
                info.x.push_back(t.num(r, "t"));
                info.y.push_back(t.num(r, "info"));
                if (std::isfinite(t.num(r, "decay_rhs"))) {
                    decay.x.push_back(t.num(r, "t"));
                    decay.y.push_back(t.num(r, "decay_rhs"));
                }
            }
            std::vector<Series> series{info};
            if (!decay.x.empty()) series.push_back(decay);
            const std::string path = (fs::path(dir) / ("flow_" + file_stem(n) + ".svg")).string();
            write_svg_plot(path, n + " along the OU flow", "t", "relative Fisher information", series, true);
            s.files.push_back(path);
        }
    }
    return s;
}

RunSummary run(const ExperimentConfig& cfg, const RunOptions& opts) {
    const std::string dir = output_directory(cfg);
    fs::create_directories(dir);
    say(opts, "building " + std::to_string(cfg.distributions.size()) + " distributions");
    const auto ds = materialize(cfg);
    RunSummary s;
    if (cfg.checks.functionals) s.merge(write_functionals(ds, dir));
    if (cfg.checks.poincare) s.merge(write_poincare(ds, dir));
    if (cfg.checks.deficits) s.merge(write_deficits(cfg, ds, dir, opts));
    if (cfg.checks.lemmas) s.merge(write_lemmas(cfg, ds, dir, opts));
    if (opts.plots) s.merge(render_plots(dir));
    return s;
}

void write_svg_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<Series>& series, bool log_y) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    constexpr double W = 640, H = 420, L = 80, R = 20, T = 40, B = 60;
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(ty(s.y[i]))) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x1 > x0)) { x0 -= 0.5; x1 += 0.5; }
    if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title) << "</text>\n"
        << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0;
        const double yv = y0 + (y1 - y0) * k / 4.0;
        const double yp = H - B - (H - T - B) * k / 4.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", xv);
        out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << buf << "</text>\n";
        std::snprintf(buf, sizeof buf, "%.3g", log_y ? std::pow(10.0, yv) : yv);
        out << "<text x=\"" << L - 6 << "\" y=\"" << yp + 4 << "\" text-anchor=\"end\">" << buf << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xml_escape(xlabel) << "</text>\n"
        << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << xml_escape(ylabel) << (log_y ? " (log scale)" : "") << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = colors[k % std::size(colors)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(ty(s.y[i]))) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 16 * (k + 1) << "\" fill=\"" << color << "\">"
            << xml_escape(s.name) << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace entlab
