// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fairtree/balance.hpp"
#include "fairtree/cost.hpp"
#include "fairtree/experiment.hpp"
#include "fairtree/fairhc.hpp"
#include "fairtree/fairness.hpp"
#include "fairtree/linkage.hpp"
#include "fairtree/oracle.hpp"
#include "support.hpp"

using namespace fairtree;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Shared between criteria 1-3: every balance run is checked for its
// separation budget and replayed by the oracle.
struct LedgerTally {
    std::size_t runs = 0;
    std::size_t bad_counts = 0;
    std::size_t bad_verify = 0;
    std::size_t bad_prep = 0;
    std::uint16_t worst = 0;
    std::string first_problem;

    void check(const HierarchyTree& before, const HierarchyTree& after, const WeightedGraph& g,
               const OperationLedger& l, std::initializer_list<OpKind> kinds, const std::string& what) {
        ++runs;
        for (OpKind kind : kinds) {
            worst = std::max(worst, l.max_separation_count(kind));
            if (l.max_separation_count(kind) <= 1) continue;
            ++bad_counts;
            if (what.ends_with("input preparation")) ++bad_prep;
            if (first_problem.empty()) first_problem = what + ": " + std::string(to_string(kind)) + " separates a pair twice";
            break;
        }
        const auto v = verify_ledger(before, after, g, l);
        if (!v.ok) {
            ++bad_verify;
            if (first_problem.empty()) first_problem = what + ": " + v.discrepancies.front();
        }
    }
};

struct BalanceCase {
    HierarchyTree tree;
    WeightedGraph graph;
    std::string label;
};

std::vector<BalanceCase> balance_cases() {
    std::vector<BalanceCase> out;
    Rng rng(2024);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 4 + rng.below(253);
        out.push_back({testing::random_binary_tree(n, rng), testing::random_graph(n, rng),
                       "random tree #" + std::to_string(i) + " n=" + std::to_string(n)});
    }
    for (int i = 0; i < 40; ++i) {
        const std::size_t n = 4 + rng.below(253);
        const std::vector<double> props{0.25, 0.75};
        const auto pts = synthetic_colored_points(n, props, 100 + static_cast<std::uint64_t>(i));
        auto g = similarity_from_points(pts);
        auto t = build_average_linkage(g);
        out.push_back({std::move(t), std::move(g), "baseline #" + std::to_string(i) + " n=" + std::to_string(n)});
    }
    return out;
}

const Fraction kEps[] = {Fraction{1, 8}, Fraction{1, 10}, Fraction{1, 16}};

// Criteria 1-3 over the same runs.
void balance_criteria(Outcome& c1, Outcome& c2, LedgerTally& tally) {
    const auto cases = balance_cases();
    double algo_seconds = 0.0;
    std::size_t audits = 0, audit_fail = 0, ratio_fail = 0;
    double worst_rb = 0.0, worst_rf = 0.0;
    std::string first_fail;
    for (const auto& bc : cases) {
        auto t0 = Clock::now();
        const auto rb = rebalance_tree(bc.tree);
        const bool rb_ok = relative_balance_audit(rb.tree, Fraction{1, 6}).passed;
        algo_seconds += seconds_since(t0);
        ++audits;
        if (!rb_ok) {
            ++audit_fail;
            if (first_fail.empty()) first_fail = bc.label + " rebalance";
        }
        const double r1 = ratio_cost(bc.graph, bc.tree, rb.tree);
        worst_rb = std::max(worst_rb, r1);
        if (!(r1 <= 1.5)) ++ratio_fail;
        tally.check(bc.tree, rb.tree, bc.graph, rb.ledger, {OpKind::rebalance}, bc.label);

        for (const Fraction eps : kEps) {
            t0 = Clock::now();
            const auto rf = refine_rebalance(rb.tree, BalanceParams{eps});
            const bool rf_ok = relative_balance_audit(rf.tree, eps).passed;
            algo_seconds += seconds_since(t0);
            ++audits;
            if (!rf_ok) {
                ++audit_fail;
                if (first_fail.empty()) first_fail = bc.label + " refine " + eps.to_string();
            }
            const double r2 = ratio_cost(bc.graph, bc.tree, rf.tree);
            worst_rf = std::max(worst_rf, r2 * 2.0 * eps.value() / 9.0);
            if (!(r2 <= 9.0 / (2.0 * eps.value()))) ++ratio_fail;
            tally.check(rb.tree, rf.tree, bc.graph, rf.ledger, {OpKind::del_ins}, bc.label + " eps=" + eps.to_string());
        }
    }
    std::ostringstream d1;
    d1 << cases.size() << " trees, " << audits - audit_fail << "/" << audits << " audits pass, balance time "
       << fmt6(algo_seconds) << " s (limit 5 s)";
    if (!first_fail.empty()) d1 << ", first failure " << first_fail;
    c1.pass = audit_fail == 0 && algo_seconds < 5.0 && cases.size() >= 200;
    c1.detail = d1.str();

    std::ostringstream d2;
    d2 << "worst rebalance ratio " << fmt6(worst_rb) << " (limit 1.5), worst refine ratio " << fmt6(worst_rf)
       << " of its 9/(2 eps) limit, " << ratio_fail << " violations";
    c2.pass = ratio_fail == 0;
    c2.detail = d2.str();
}

// Criterion 6 runs, reused by criterion 3 for the fairhc ledger budget.
struct FairGridResult {
    std::size_t runs = 0;
    std::size_t bound_fail = 0;
    std::size_t mono_fail = 0;
    std::size_t aborted = 0;
    std::string first_fail;
};

FairGridResult fair_grid(LedgerTally& tally, std::size_t& fold_budget_fail, std::size_t& abstract_budget_fail) {
    FairGridResult res;
    for (std::size_t n : {64UL, 256UL}) {
        for (double c0 : {0.5, 0.25}) {
            for (double c : {4.0, 8.0}) {
                for (std::size_t h : {4UL, 8UL}) {
                    for (std::size_t k : {2UL, 4UL}) {
                        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                            std::ostringstream label;
                            label << "n=" << n << " c0=" << c0 << " c=" << c << " h=" << h << " k=" << k << " seed=" << seed;
                            ++res.runs;
                            const std::vector<double> props{c0, 1.0 - c0};
                            const auto pts = synthetic_colored_points(n, props, seed);
                            const auto g = similarity_from_points(pts);
                            const auto col = ColorAssignment::from_colors(pts.colors(), 2);
                            FairHCConfig cfg;
                            cfg.c_bal = c;
                            cfg.h = h;
                            cfg.k = k;
                            try {
                                OperationLedger prep(build_average_linkage(g));
                                const auto balanced = prepare_balance(prep.initial(), fairhc_epsilon(c, n), prep);
                                const auto r = fairhc(balanced, col, cfg);
                                const auto bound = fairness_bound(cfg, n, col);
                                if (!bound_audit(r.tree, col, bound).passed) {
                                    ++res.bound_fail;
                                    if (res.first_fail.empty()) res.first_fail = label.str() + " outside bound";
                                }
                                const auto cc = color_counts(r.tree, col);
                                for (NodeId v : r.tree.preorder()) {
                                    const auto s = r.tree.size(v);
                                    if (s <= r.stop_size || r.tree.is_leaf(v)) continue;
                                    const auto i = static_cast<std::size_t>(v) * 2;
                                    if (cc[i] == 0 || cc[i + 1] == 0) {
                                        ++res.mono_fail;
                                        if (res.first_fail.empty()) res.first_fail = label.str() + " monochromatic cluster";
                                        break;
                                    }
                                }
                                const double fold_cap = 2.0 * std::log2(static_cast<double>(n)) / std::log2(static_cast<double>(h));
                                if (static_cast<double>(r.ledger.max_separation_count(OpKind::fold)) > fold_cap) ++fold_budget_fail;
                                if (r.ledger.max_separation_count(OpKind::abstract) > 1) ++abstract_budget_fail;
                                tally.check(prep.initial(), balanced, g, prep, {OpKind::rebalance, OpKind::del_ins},
                                            label.str() + " input preparation");
                                tally.check(balanced, r.tree, g, r.ledger, {OpKind::abstract}, label.str());
                            } catch (const std::exception& e) {
                                ++res.aborted;
                                if (res.first_fail.empty()) res.first_fail = label.str() + " threw: " + e.what();
                            }
                        }
                    }
                }
            }
        }
    }
    return res;
}

Outcome oracle_optimality() {
    Rng rng(77);
    std::size_t instances = 0, below_opt = 0, cost_mismatch = 0, outputs = 0;
    double worst_gap = 0.0;
    for (int i = 0; i < 120; ++i) {
        const std::size_t n = 3 + rng.below(5);  // 3..7
        const auto g = testing::random_graph(n, rng);
        const auto opt = optimal_cost(g);
        ++instances;
        std::vector<int> cv(n);
        for (std::size_t v = 0; v < n; ++v) cv[v] = static_cast<int>(v % 2);
        const auto col = ColorAssignment::from_colors(cv, 2);

        std::vector<HierarchyTree> produced;
        const auto base = testing::random_binary_tree(n, rng);
        produced.push_back(base);
        produced.push_back(build_average_linkage(g));
        for (const auto& start : {base, produced.back()}) {
            const auto rb = rebalance_tree(start);
            produced.push_back(rb.tree);
            produced.push_back(refine_rebalance(rb.tree, BalanceParams{Fraction{1, 8}}).tree);
            FairHCConfig cfg;
            cfg.c_bal = 4.0;
            cfg.h = 2;
            cfg.k = 2;
            OperationLedger prep(start);
            const auto balanced = prepare_balance(start, fairhc_epsilon(cfg.c_bal, n), prep);
            produced.push_back(fairhc(balanced, col, cfg).tree);
        }
        for (const auto& t : produced) {
            ++outputs;
            const double fast = dasgupta_cost(t, g);
            const double slow = brute_force_cost(t, g);
            worst_gap = std::max(worst_gap, std::abs(fast - slow));
            if (std::abs(fast - slow) > 1e-9) ++cost_mismatch;
            if (fast < opt.cost && opt.cost - fast > 1e-9) ++below_opt;
        }
    }
    Outcome o;
    o.pass = instances >= 100 && below_opt == 0 && cost_mismatch == 0;
    std::ostringstream d;
    d << instances << " graphs (n 3..7), " << outputs << " outputs, " << below_opt << " below optimum, max |fast - brute| "
      << fmt6(worst_gap) << " (limit 1e-9)";
    o.detail = d.str();
    return o;
}

Outcome stochastic_fairness() {
    const auto t0 = Clock::now();
    const std::size_t n = 1024;
    const Fraction eps{1, 40};
    const std::vector<double> props{0.5, 0.5};
    const auto pts = synthetic_colored_points(n, props, 1);
    const auto g = similarity_from_points(pts);
    OperationLedger prep(build_average_linkage(g));
    const auto balanced = prepare_balance(prep.initial(), eps, prep);
    const auto model = StochasticColorModel::uniform(n, props, 0.5);
    const auto fp = FairnessParams::uniform(2, 0.2, 0.8);
    std::size_t fair = 0, floor_ok = 0, threshold = 0;
    double floor = 0.0;
    std::size_t smallest = n;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto colors = sample_colors(model, seed);
        const auto r = stochastically_fair_hc(balanced, model, fp, eps, ThresholdMode::depth);
        threshold = r.threshold;
        floor = r.size_floor;
        if (fairness_audit(r.tree, colors, fp).passed) ++fair;
        const auto m = min_internal_size(r.tree);
        smallest = std::min(smallest, m);
        if (static_cast<double>(m) >= r.size_floor) ++floor_ok;
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = model.admissible(fp) && fair >= 90 && floor_ok == 100 && secs < 30.0;
    std::ostringstream d;
    d << "depth t=" << threshold << ", fair in " << fair << "/100 seeds (need 90), size floor " << fmt6(floor)
      << " met in " << floor_ok << "/100 (smallest cluster " << smallest << "), " << fmt6(secs) << " s (limit 30 s)";
    o.detail = d.str();
    return o;
}

std::size_t modal_bucket(const Histogram& h) {
    return static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
}

Outcome histogram_concentration() {
    std::istringstream cfg_text(R"({"replications": 10, "seed": 1,
        "input": {"synthetic": {"n": 256, "proportions": [0.25, 0.75]}},
        "stages": [{"op": "fairhc", "c": 4, "h": 4, "k": 2}]})");
    const auto rep = run_experiment(parse_experiment_config(cfg_text));
    Histogram base{}, out{};
    std::size_t done = 0;
    for (const auto& r : rep.replications) {
        if (r.aborted) continue;
        ++done;
        for (std::size_t b = 0; b < kHistogramBuckets; ++b) {
            base[b] += r.baseline_hist[b];
            out[b] += r.output_hist[b];
        }
    }
    const std::size_t mode = modal_bucket(out);
    const bool contains = mode == 2;  // [0.2, 0.3)
    const bool extremes = base[0] + base[9] > 0;
    Outcome o;
    o.pass = done == rep.replications.size() && contains && extremes;
    std::ostringstream d;
    d << done << " replications, output modal bucket [" << fmt6(0.1 * static_cast<double>(mode)) << ", "
      << fmt6(0.1 * static_cast<double>(mode + 1)) << ") holds " << out[mode] << " clusters, baseline mass at 0/1 buckets "
      << base[0] << "+" << base[9];
    o.detail = d.str();
    return o;
}

double pipeline_seconds(std::size_t n, std::uint64_t seed) {
    const auto t0 = Clock::now();
    const std::vector<double> props{0.25, 0.75};
    const auto pts = synthetic_colored_points(n, props, seed);
    const auto g = similarity_from_points(pts);
    const auto col = ColorAssignment::from_colors(pts.colors(), 2);
    const auto base = build_average_linkage(g);
    StageConfig rb;
    rb.kind = StageConfig::Kind::rebalance;
    StageConfig rf;
    rf.kind = StageConfig::Kind::refine;
    rf.eps = Fraction{1, 8};
    StageConfig fh;
    fh.kind = StageConfig::Kind::fairhc;
    const auto run = run_pipeline(base, col, {rb, rf, fh}, seed);
    volatile double sink = dasgupta_cost(run.tree, g);
    (void)sink;
    return seconds_since(t0);
}

Outcome runtime_scaling() {
    const std::vector<std::size_t> sizes{64, 128, 256, 512};
    std::vector<double> xs, ys;
    double at256 = 0.0;
    std::ostringstream d;
    for (std::size_t n : sizes) {
        std::vector<double> t;
        for (std::uint64_t s = 1; s <= 5; ++s) t.push_back(pipeline_seconds(n, s));
        std::sort(t.begin(), t.end());
        const double med = t[t.size() / 2];
        if (n == 256) at256 = t.back();
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(med));
        d << "n=" << n << ":" << fmt6(med * 1e3) << "ms ";
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    Outcome o;
    o.pass = at256 < 10.0 && slope <= 2.4;
    d << "slope " << fmt6(slope) << " (limit 2.4), slowest n=256 run " << fmt6(at256) << " s (limit 10 s)";
    o.detail = d.str();
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Runs every subcommand twice into separate directories and compares all
// outputs except wall-clock timings.
Outcome determinism(const std::string& cli) {
    Outcome o;
    if (cli.empty() || !fs::exists(cli)) {
        o.pass = false;
        o.detail = "command-line binary not found";
        return o;
    }
    const fs::path root = fs::temp_directory_path() / "fairtree_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream cfg(root / "exp.json");
        cfg << R"({"replications": 3, "seed": 4, "input": {"synthetic": {"n": 96, "proportions": [0.25, 0.75]}},
                   "stages": [{"op": "rebalance"}, {"op": "refine", "epsilon": "1/8"}, {"op": "fairhc", "c": 4, "h": 4, "k": 2}]})";
    }
    const std::string in = " --synthetic 96 --seed 9";
    const std::vector<std::pair<std::string, std::string>> commands{
        {"build-baseline", "build-baseline" + in},
        {"rebalance", "rebalance" + in},
        {"refine", "refine" + in + " --epsilon 1/10"},
        {"stochastic", "stochastic --synthetic 512 --seed 9 --epsilon 1/40 --trials 3"},
        {"fairhc", "fairhc" + in + " --c 4 --h 4 --k 2"},
        {"audit", "audit" + in + " --epsilon 1/6 --alpha 0.1 --beta 0.9"},
        {"verify", "verify" + in + " --before " + (root / "refine_0" / "input_tree.txt").string() + " --after " +
                       (root / "refine_0" / "tree.txt").string() + " --ledger " + (root / "refine_0" / "ledger.txt").string()},
        {"experiment", "experiment --config " + (root / "exp.json").string()},
    };
    std::size_t same = 0;
    std::string first_diff;
    for (const auto& [name, args] : commands) {
        std::string outs[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = root / (name + "_" + std::to_string(rep));
            const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + dir.string() + "\" > \"" +
                                    (root / (name + "_" + std::to_string(rep) + ".stdout")).string() + "\" 2>&1";
            const int rc = std::system(cmd.c_str());
            std::string all = "exit=" + std::to_string(rc) + "\n" + slurp(root / (name + "_" + std::to_string(rep) + ".stdout"));
            if (fs::exists(dir)) {
                std::vector<fs::path> files;
                for (const auto& f : fs::directory_iterator(dir)) files.push_back(f.path());
                std::sort(files.begin(), files.end());
                for (const auto& f : files) {
                    if (f.filename() == "timing.csv") continue;
                    all += "== " + f.filename().string() + "\n" + slurp(f);
                }
            }
            outs[rep] = std::move(all);
        }
        if (outs[0] == outs[1]) ++same;
        else if (first_diff.empty()) first_diff = name;
    }
    o.pass = same == commands.size();
    o.detail = std::to_string(same) + "/" + std::to_string(commands.size()) + " subcommands byte-identical across two runs";
    if (!first_diff.empty()) o.detail += ", first difference in " + first_diff;
    fs::remove_all(root);
    return o;
}

void report(int id, const char* name, const Outcome& o, int& failures) {
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    int failures = 0;

    Outcome c1, c2;
    LedgerTally tally;
    balance_criteria(c1, c2, tally);
    report(1, "balance guarantee", c1, failures);
    report(2, "cost bounds", c2, failures);

    std::size_t fold_budget_fail = 0, abstract_budget_fail = 0;
    const auto grid = fair_grid(tally, fold_budget_fail, abstract_budget_fail);
    Outcome c3;
    c3.pass = tally.bad_counts == 0 && tally.bad_verify == 0 && fold_budget_fail == 0 && abstract_budget_fail == 0 &&
              grid.aborted == 0;
    {
        std::ostringstream d;
        d << tally.runs << " ledgers replayed, " << tally.bad_verify << " with discrepancies, " << tally.bad_counts
          << " splitting a pair twice (" << tally.bad_prep << " of them fairhc input preparation, worst count " << tally.worst << "), fairhc fold/abstraction budget misses " << fold_budget_fail << "/"
          << abstract_budget_fail;
        if (!tally.first_problem.empty()) d << ", first: " << tally.first_problem;
        c3.detail = d.str();
    }
    report(3, "ledger separation counts", c3, failures);

    report(4, "oracle optimality", oracle_optimality(), failures);
    report(5, "stochastic fairness", stochastic_fairness(), failures);

    Outcome c6;
    c6.pass = grid.bound_fail == 0 && grid.mono_fail == 0 && grid.aborted == 0;
    {
        std::ostringstream d;
        d << grid.runs << " runs (32 configs x 5 seeds), " << grid.bound_fail << " outside the bound, " << grid.mono_fail
          << " with a monochromatic cluster above stop size, " << grid.aborted << " aborted";
        if (!grid.first_fail.empty()) d << ", first: " << grid.first_fail;
        c6.detail = d.str();
    }
    report(6, "deterministic fairness", c6, failures);

    report(7, "histogram concentration", histogram_concentration(), failures);
    report(8, "runtime scaling", runtime_scaling(), failures);
    report(9, "determinism", determinism(cli), failures);

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
