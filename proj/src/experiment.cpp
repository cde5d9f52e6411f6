#include "fairtree/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fairtree/balance.hpp"
#include "fairtree/cost.hpp"
#include "fairtree/linkage.hpp"
#include "fairtree/random.hpp"

namespace fairtree {

namespace {

using json = nlohmann::json;

std::vector<double> data_proportions(const ColorAssignment& c) {
    std::vector<double> p;
    for (std::size_t l = 0; l < c.num_colors; ++l) p.push_back(c.proportion(l));
    return p;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

Fraction fraction_from(const json& v) {
    if (v.is_string()) return Fraction::parse(v.get<std::string>());
    if (v.is_number_integer()) return {v.get<std::int64_t>(), 1};
    if (v.is_number()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9f", v.get<double>());
        return Fraction::parse(buf);
    }
    throw std::invalid_argument("epsilon must be a number or a string such as \"1/8\"");
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

StageConfig parse_stage(const json& js, std::size_t index) {
    const std::string where = "stage " + std::to_string(index);
    if (!js.is_object() || !js.contains("op")) throw std::invalid_argument(where + " needs an \"op\" field");
    StageConfig s;
    const auto op = js.at("op").get<std::string>();
    if (op == "rebalance") {
        s.kind = StageConfig::Kind::rebalance;
        reject_unknown(js, {"op"}, where);
    } else if (op == "refine") {
        s.kind = StageConfig::Kind::refine;
        reject_unknown(js, {"op", "epsilon"}, where);
        if (js.contains("epsilon")) s.eps = fraction_from(js.at("epsilon"));
    } else if (op == "stochastic") {
        s.kind = StageConfig::Kind::stochastic;
        reject_unknown(js, {"op", "epsilon", "alpha", "beta", "delta", "mode", "p", "prepare"}, where);
        if (js.contains("epsilon")) s.eps = fraction_from(js.at("epsilon"));
        s.alpha = get_or(js, "alpha", s.alpha);
        s.beta = get_or(js, "beta", s.beta);
        s.delta_ch = get_or(js, "delta", s.delta_ch);
        if (js.contains("mode")) s.mode = parse_threshold_mode(js.at("mode").get<std::string>());
        s.probs = get_or(js, "p", s.probs);
        s.prepare = get_or(js, "prepare", s.prepare);
    } else if (op == "fairhc") {
        s.kind = StageConfig::Kind::fairhc;
        reject_unknown(js, {"op", "c", "h", "delta", "k", "slack", "stop_size", "prepare"}, where);
        s.fairhc.c_bal = get_or(js, "c", s.fairhc.c_bal);
        s.fairhc.h = get_or(js, "h", s.fairhc.h);
        s.fairhc.k = get_or(js, "k", s.fairhc.k);
        s.fairhc.fold_slack = get_or(js, "slack", s.fairhc.fold_slack);
        s.fairhc.stop_size = get_or(js, "stop_size", s.fairhc.stop_size);
        if (js.contains("delta")) s.delta_exp = js.at("delta").get<double>();
        if (js.contains("h") && s.delta_exp) throw std::invalid_argument(where + ": give either h or delta, not both");
        s.prepare = get_or(js, "prepare", s.prepare);
    } else {
        throw std::invalid_argument(where + ": unknown op '" + op + "'");
    }
    return s;
}

std::string describe(const StageConfig& s) {
    std::ostringstream o;
    o << to_string(s.kind);
    switch (s.kind) {
        case StageConfig::Kind::rebalance: break;
        case StageConfig::Kind::refine: o << "(eps=" << s.eps.to_string() << ")"; break;
        case StageConfig::Kind::stochastic:
            o << "(eps=" << s.eps.to_string() << ",alpha=" << fmt6(s.alpha) << ",beta=" << fmt6(s.beta)
              << ",delta=" << fmt6(s.delta_ch) << ",mode=" << (s.mode == ThresholdMode::depth ? "depth" : "size") << ")";
            break;
        case StageConfig::Kind::fairhc:
            o << "(c=" << fmt6(s.fairhc.c_bal) << ",";
            if (s.delta_exp) o << "delta=" << fmt6(*s.delta_exp);
            else o << "h=" << s.fairhc.h;
            o << ",k=" << s.fairhc.k << ")";
            break;
    }
    return o.str();
}

AuditState state_of(bool passed) { return passed ? AuditState::passed : AuditState::failed; }

AuditState combine(AuditState a, AuditState b) {
    if (a == AuditState::failed || b == AuditState::failed) return AuditState::failed;
    if (a == AuditState::passed || b == AuditState::passed) return AuditState::passed;
    return AuditState::not_run;
}

}  // namespace

std::string_view to_string(StageConfig::Kind k) {
    switch (k) {
        case StageConfig::Kind::rebalance: return "rebalance";
        case StageConfig::Kind::refine: return "refine";
        case StageConfig::Kind::stochastic: return "stochastic";
        case StageConfig::Kind::fairhc: return "fairhc";
    }
    return "?";
}

std::string_view to_string(AuditState s) {
    switch (s) {
        case AuditState::not_run: return "n/a";
        case AuditState::passed: return "pass";
        case AuditState::failed: return "fail";
    }
    return "?";
}

std::vector<std::size_t> stratified_sample(const PointDataset& data, std::size_t m, std::uint64_t seed) {
    if (m == 0 || m > data.size()) {
        throw std::invalid_argument("sample size must lie in [1, " + std::to_string(data.size()) + "]");
    }
    const std::size_t lam = data.num_colors();
    std::vector<std::vector<std::size_t>> by_color(lam);
    for (std::size_t r = 0; r < data.size(); ++r) by_color[static_cast<std::size_t>(data.color(r))].push_back(r);
    std::vector<double> props;
    for (const auto& rows : by_color) props.push_back(static_cast<double>(rows.size()) / static_cast<double>(data.size()));
    const auto quota = apportion(m, props);
    Rng rng(seed);
    std::vector<std::size_t> picked;
    for (std::size_t l = 0; l < lam; ++l) {
        auto& rows = by_color[l];
        rng.shuffle(std::span<std::size_t>(rows));
        picked.insert(picked.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(quota[l]));
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

LoadedInput load_input(const InputSpec& spec, std::uint64_t seed) {
    PointDataset pts;
    if (spec.csv_path.empty()) {
        pts = synthetic_colored_points(spec.n, spec.proportions, seed, spec.synthetic);
    } else {
        std::ifstream in(spec.csv_path);
        if (!in) throw std::runtime_error("cannot open " + spec.csv_path);
        CsvOptions opts;
        opts.delimiter = spec.delimiter;
        opts.id_column = spec.id_column;
        pts = load_points(in, spec.color_column, opts);
        if (spec.sample_size > 0) {
            const auto rows = stratified_sample(pts, spec.sample_size, seed);
            pts = pts.select(rows);
        }
    }
    if (spec.normalize) pts = pts.min_max_normalized();
    auto g = similarity_from_points(pts);
    auto colors = ColorAssignment::from_colors(pts.colors(), pts.num_colors());
    return {std::move(pts), std::move(g), std::move(colors)};
}

void ExperimentConfig::validate() const {
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (input.csv_path.empty()) {
        if (input.n < 2) throw std::invalid_argument("synthetic input needs n >= 2");
        apportion(input.n, input.proportions);
    } else if (input.color_column.empty()) {
        throw std::invalid_argument("csv input needs a color column");
    }
    for (const auto& s : stages) {
        switch (s.kind) {
            case StageConfig::Kind::rebalance: break;
            case StageConfig::Kind::refine:
                if (s.eps.num == 0 || !(s.eps < Fraction{1, 6})) throw std::invalid_argument("refine epsilon must lie in (0, 1/6)");
                break;
            case StageConfig::Kind::stochastic:
                if (!(s.eps < Fraction{1, 2})) throw std::invalid_argument("stochastic epsilon must be below 1/2");
                if (!(s.alpha > 0 && s.alpha <= s.beta && s.beta < 1)) throw std::invalid_argument("need 0 < alpha <= beta < 1");
                if (!(s.delta_ch > 0 && s.delta_ch < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
                break;
            case StageConfig::Kind::fairhc: {
                auto c = s.fairhc;
                if (s.delta_exp) {
                    if (!(*s.delta_exp > 0 && *s.delta_exp < 1)) throw std::invalid_argument("fairhc delta must lie in (0, 1)");
                    // h comes from n at run time; only check the rest here.
                    c.h = std::bit_ceil(std::max<std::size_t>(c.k, 2));
                }
                c.validate();
                break;
            }
        }
    }
}

ExperimentConfig parse_experiment_config(std::istream& in) {
    json js;
    try {
        js = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        reject_unknown(js, {"seed", "replications", "input", "normalize", "metric", "stages"}, "config");
        cfg.seed = get_or<std::uint64_t>(js, "seed", cfg.seed);
        if (js.contains("replications")) {
            const auto r = js.at("replications").get<long long>();
            if (r < 1) throw std::invalid_argument("replications must be >= 1");
            cfg.replications = static_cast<std::size_t>(r);
        }
        if (js.contains("metric") && js.at("metric").get<std::string>() != "euclidean") {
            throw std::invalid_argument("only the euclidean metric is supported");
        }
        cfg.input.normalize = get_or(js, "normalize", false);
        if (js.contains("input")) {
            const auto& inp = js.at("input");
            reject_unknown(inp, {"synthetic", "csv"}, "input");
            if (inp.contains("synthetic") == inp.contains("csv")) throw std::invalid_argument("input needs exactly one of synthetic, csv");
            if (inp.contains("synthetic")) {
                const auto& sy = inp.at("synthetic");
                reject_unknown(sy, {"n", "proportions", "dim", "blobs", "center_spread", "blob_sigma", "color_shift"}, "synthetic");
                auto& o = cfg.input.synthetic;
                cfg.input.n = get_or(sy, "n", cfg.input.n);
                cfg.input.proportions = get_or(sy, "proportions", cfg.input.proportions);
                o.dim = get_or(sy, "dim", o.dim);
                o.blobs = get_or(sy, "blobs", o.blobs);
                o.center_spread = get_or(sy, "center_spread", o.center_spread);
                o.blob_sigma = get_or(sy, "blob_sigma", o.blob_sigma);
                o.color_shift = get_or(sy, "color_shift", o.color_shift);
            } else {
                const auto& cs = inp.at("csv");
                reject_unknown(cs, {"path", "color_column", "id_column", "delimiter", "sample_size"}, "csv");
                cfg.input.csv_path = cs.at("path").get<std::string>();
                cfg.input.color_column = cs.at("color_column").get<std::string>();
                cfg.input.id_column = get_or<std::string>(cs, "id_column", "");
                const auto delim = get_or<std::string>(cs, "delimiter", ",");
                if (delim.size() != 1) throw std::invalid_argument("delimiter must be one character");
                cfg.input.delimiter = delim[0];
                cfg.input.sample_size = get_or<std::size_t>(cs, "sample_size", 0);
            }
        }
        if (js.contains("stages")) {
            std::size_t i = 0;
            for (const auto& s : js.at("stages")) cfg.stages.push_back(parse_stage(s, i++));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

Histogram balance_histogram(const HierarchyTree& t, const ColorAssignment& col) {
    const auto counts = color_counts(t, col);
    Histogram h{};
    for (NodeId v : t.preorder()) {
        if (t.is_leaf(v)) continue;
        const auto c0 = counts[static_cast<std::size_t>(v) * col.num_colors];
        // Integer bucket index avoids float rounding at the tenths.
        const std::size_t b = std::min<std::size_t>(kHistogramBuckets - 1, 10 * c0 / t.size(v));
        ++h[b];
    }
    return h;
}

std::size_t monochromatic_clusters(const HierarchyTree& t, const ColorAssignment& col) {
    const auto counts = color_counts(t, col);
    std::size_t m = 0;
    for (NodeId v : t.preorder()) {
        if (t.is_leaf(v)) continue;
        for (std::size_t l = 0; l < col.num_colors; ++l) {
            if (counts[static_cast<std::size_t>(v) * col.num_colors + l] == t.size(v)) ++m;
        }
    }
    return m;
}

HierarchyTree prepare_balance(const HierarchyTree& t, Fraction eps, OperationLedger& ledger) {
    if (relative_balance_audit(t, eps).passed) return t;
    HierarchyTree cur = t;
    if (!relative_balance_audit(cur, Fraction{1, 6}).passed) {
        auto r = rebalance_tree(cur);
        ledger.append(r.ledger);
        cur = std::move(r.tree);
    }
    if (eps < Fraction{1, 6} && eps.num > 0) {
        auto r = refine_rebalance(cur, BalanceParams{eps});
        ledger.append(r.ledger);
        cur = std::move(r.tree);
    }
    return cur;
}

PipelineRun run_pipeline(const HierarchyTree& baseline, const ColorAssignment& colors,
                         const std::vector<StageConfig>& stages, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    PipelineRun run{baseline, OperationLedger(baseline), colors, AuditState::not_run, AuditState::not_run, {}, {}};
    const std::size_t n = baseline.num_leaves();
    std::ostringstream notes;
    HierarchyTree cur = baseline;
    for (const auto& s : stages) {
        const auto start = clock::now();
        switch (s.kind) {
            case StageConfig::Kind::rebalance: {
                auto r = rebalance_tree(cur);
                run.ledger.append(r.ledger);
                cur = std::move(r.tree);
                run.balance = state_of(relative_balance_audit(cur, Fraction{1, 6}).passed);
                break;
            }
            case StageConfig::Kind::refine: {
                auto r = refine_rebalance(cur, BalanceParams{s.eps});
                run.ledger.append(r.ledger);
                cur = std::move(r.tree);
                run.balance = state_of(relative_balance_audit(cur, s.eps).passed);
                break;
            }
            case StageConfig::Kind::stochastic: {
                if (s.prepare) {
                    cur = prepare_balance(cur, s.eps, run.ledger);
                    run.balance = state_of(relative_balance_audit(cur, s.eps).passed);
                }
                const auto probs = s.probs.empty() ? data_proportions(run.colors) : s.probs;
                const auto model = StochasticColorModel::uniform(n, probs, s.delta_ch);
                const auto fp = FairnessParams::uniform(model.num_colors, s.alpha, s.beta);
                const auto sampled = sample_colors(model, seed);
                auto r = stochastically_fair_hc(cur, model, fp, s.eps, s.mode);
                run.ledger.append(r.ledger);
                cur = std::move(r.tree);
                run.colors = sampled;
                run.fairness = combine(run.fairness, state_of(fairness_audit(cur, sampled, fp).passed));
                notes << "stochastic: threshold=" << r.threshold << " size_floor=" << fmt6(r.size_floor)
                      << " min_internal=" << min_internal_size(cur) << " admissible=" << (model.admissible(fp) ? "yes" : "no")
                      << '\n';
                break;
            }
            case StageConfig::Kind::fairhc: {
                auto cfg = s.fairhc;
                if (s.delta_exp) {
                    cfg.h = frontier_from_exponent(n, *s.delta_exp);
                    notes << "fairhc: h=" << cfg.h << " from n^delta=" << fmt6(std::pow(static_cast<double>(n), *s.delta_exp))
                          << '\n';
                }
                const Fraction eps = fairhc_epsilon(cfg.c_bal, n);
                if (s.prepare) {
                    cur = prepare_balance(cur, eps, run.ledger);
                    run.balance = state_of(relative_balance_audit(cur, eps).passed);
                }
                auto r = fairhc(cur, run.colors, cfg);
                run.ledger.append(r.ledger);
                cur = std::move(r.tree);
                const auto bound = fairness_bound(cfg, n, run.colors);
                run.fairness = combine(run.fairness, state_of(bound_audit(cur, run.colors, bound).passed));
                notes << "fairhc: eps=" << eps.to_string() << " levels=" << r.levels << " stop_size=" << r.stop_size
                      << " fold_bound=" << fmt6(r.fold_bound) << " fold_bounds_ok=" << (r.fold_bounds_ok ? "yes" : "no")
                      << " abstract_bound=" << fmt6(r.abstract_bound)
                      << " abstract_bounds_ok=" << (r.abstract_bounds_ok ? "yes" : "no")
                      << '\n';
                break;
            }
        }
        run.timings.push_back({std::string(to_string(s.kind)),
                               std::chrono::duration<double>(clock::now() - start).count()});
    }
    run.tree = std::move(cur);
    run.notes = notes.str();
    return run;
}

bool ExperimentReport::all_passed() const {
    for (const auto& r : replications) {
        if (r.aborted || r.balance == AuditState::failed || r.fairness == AuditState::failed) return false;
        if (r.ratio_cost > r.ceiling * (1.0 + 1e-12)) return false;
    }
    return true;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    using clock = std::chrono::steady_clock;
    ExperimentReport rep;
    rep.config = cfg;
    for (std::size_t i = 0; i < cfg.replications; ++i) {
        ReplicationResult r;
        r.index = i;
        r.seed = cfg.seed + i;
        try {
            auto start = clock::now();
            const auto data = load_input(cfg.input, r.seed);
            r.n = data.points.size();
            r.timings.push_back({"load", std::chrono::duration<double>(clock::now() - start).count()});
            start = clock::now();
            const auto baseline = build_average_linkage(data.graph);
            r.timings.push_back({"baseline", std::chrono::duration<double>(clock::now() - start).count()});

            auto run = run_pipeline(baseline, data.colors, cfg.stages, r.seed);
            r.timings.insert(r.timings.end(), run.timings.begin(), run.timings.end());
            r.ratio_cost = ratio_cost(data.graph, baseline, run.tree);
            r.ceiling = run.ledger.certified_ceiling(data.graph);
            r.balance = run.balance;
            r.fairness = run.fairness;
            r.baseline_hist = balance_histogram(baseline, run.colors);
            r.output_hist = balance_histogram(run.tree, run.colors);
            r.baseline_monochromatic = monochromatic_clusters(baseline, run.colors);
            r.output_monochromatic = monochromatic_clusters(run.tree, run.colors);
            std::ostringstream ledger;
            write_ledger(ledger, run.ledger);
            r.ledger_text = ledger.str();
            r.notes = run.notes;
        } catch (const std::exception& e) {
            r.aborted = true;
            r.reason = e.what();
        }
        rep.replications.push_back(std::move(r));
    }
    return rep;
}

void emit_reports(const ExperimentReport& rep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };

    std::size_t done = 0, balance_ok = 0, balance_run = 0, fair_ok = 0, fair_run = 0;
    double ratio_sum = 0.0, ceiling_sum = 0.0;
    {
        auto f = open("report");
        const auto& c = rep.config;
        f << "input: ";
        if (c.input.csv_path.empty()) {
            f << "synthetic n=" << c.input.n << " proportions=";
            for (std::size_t i = 0; i < c.input.proportions.size(); ++i) f << (i ? "," : "") << fmt6(c.input.proportions[i]);
        } else {
            f << "csv " << c.input.csv_path << " color=" << c.input.color_column << " sample=" << c.input.sample_size;
        }
        f << " normalize=" << (c.input.normalize ? "yes" : "no") << '\n';
        f << "stages:";
        for (const auto& s : c.stages) f << ' ' << describe(s);
        f << "\nseed: " << c.seed << "\nreplications: " << c.replications << '\n';
        for (const auto& r : rep.replications) {
            f << "replication " << r.index << ": seed=" << r.seed;
            if (r.aborted) {
                f << " status=aborted reason=" << r.reason << '\n';
                continue;
            }
            ++done;
            ratio_sum += r.ratio_cost;
            ceiling_sum += r.ceiling;
            if (r.balance != AuditState::not_run) ++balance_run, balance_ok += r.balance == AuditState::passed;
            if (r.fairness != AuditState::not_run) ++fair_run, fair_ok += r.fairness == AuditState::passed;
            f << " n=" << r.n << " ratio_cost=" << fmt6(r.ratio_cost) << " ceiling=" << fmt6(r.ceiling)
              << " balance=" << to_string(r.balance) << " fairness=" << to_string(r.fairness)
              << " monochromatic_baseline=" << r.baseline_monochromatic << " monochromatic_output=" << r.output_monochromatic
              << " status=ok\n";
            std::istringstream notes(r.notes);
            for (std::string line; std::getline(notes, line);) f << "  " << line << '\n';
        }
        f << "completed: " << done << '/' << rep.replications.size() << '\n';
        f << "mean_ratio_cost: " << (done ? fmt6(ratio_sum / static_cast<double>(done)) : "n/a") << '\n';
        f << "mean_ceiling: " << (done ? fmt6(ceiling_sum / static_cast<double>(done)) : "n/a") << '\n';
        f << "balance_pass: " << balance_ok << '/' << balance_run << '\n';
        f << "fairness_pass: " << fair_ok << '/' << fair_run << '\n';
        f << "all_passed: " << (rep.all_passed() ? "yes" : "no") << '\n';
    }
    {
        auto f = open("ratios.csv");
        f << "replication,seed,n,ratio_cost,ceiling,balance,fairness,status\n";
        for (const auto& r : rep.replications) {
            if (r.aborted) continue;
            f << r.index << ',' << r.seed << ',' << r.n << ',' << fmt6(r.ratio_cost) << ',' << fmt6(r.ceiling) << ','
              << to_string(r.balance) << ',' << to_string(r.fairness) << ",ok\n";
        }
    }
    {
        auto f = open("balance_hist.csv");
        Histogram base{}, out{};
        for (const auto& r : rep.replications) {
            if (r.aborted) continue;
            for (std::size_t b = 0; b < kHistogramBuckets; ++b) {
                base[b] += r.baseline_hist[b];
                out[b] += r.output_hist[b];
            }
        }
        f << "bucket,lo,hi,baseline,output\n";
        for (std::size_t b = 0; b < kHistogramBuckets; ++b) {
            f << b << ',' << fmt6(0.1 * static_cast<double>(b)) << ',' << fmt6(0.1 * static_cast<double>(b + 1)) << ','
              << base[b] << ',' << out[b] << '\n';
        }
    }
    {
        auto f = open("ledger.txt");
        for (const auto& r : rep.replications) {
            f << "# replication " << r.index << " seed " << r.seed << '\n';
            f << r.ledger_text;
        }
    }
    {
        auto f = open("timing.csv");
        f << "replication,stage,seconds\n";
        for (const auto& r : rep.replications) {
            for (const auto& t : r.timings) f << r.index << ',' << t.stage << ',' << fmt6(t.seconds) << '\n';
        }
    }
}

}  // namespace fairtree
