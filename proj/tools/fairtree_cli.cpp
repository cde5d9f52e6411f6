#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
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
#include "fairtree/tree_io.hpp"

namespace fs = std::filesystem;
using namespace fairtree;

namespace {

struct InputFlags {
    std::string points;
    std::string color_column = "color";
    std::string id_column;
    std::string delimiter = ",";
    std::size_t sample = 0;
    bool normalize = false;
    std::size_t synthetic = 256;
    std::vector<double> proportions{0.25, 0.75};

    InputSpec spec() const {
        InputSpec s;
        s.n = synthetic;
        s.proportions = proportions;
        s.csv_path = points;
        s.color_column = color_column;
        s.id_column = id_column;
        if (delimiter.size() != 1) throw std::invalid_argument("--delimiter takes one character");
        s.delimiter = delimiter == "t" ? '\t' : delimiter[0];
        s.sample_size = sample;
        s.normalize = normalize;
        return s;
    }
};

struct Common {
    InputFlags input;
    std::string tree_file;
    std::string linkage_file;
    std::string out;
    std::uint64_t seed = 1;
    bool verify = false;
};

void add_input(CLI::App* app, Common& c) {
    app->add_option("--points", c.input.points, "delimited point file with a header row (default: synthetic data)");
    app->add_option("--color-column", c.input.color_column, "column holding the protected attribute")->capture_default_str();
    app->add_option("--id-column", c.input.id_column, "column holding row ids");
    app->add_option("--delimiter", c.input.delimiter, "field separator, 't' for tab")->capture_default_str();
    app->add_option("--sample", c.input.sample, "stratified sample of this many rows (0 keeps all)");
    app->add_flag("--normalize", c.input.normalize, "min-max scale features");
    app->add_option("--synthetic", c.input.synthetic, "synthetic point count")->capture_default_str();
    app->add_option("--proportions", c.input.proportions, "synthetic color proportions")->delimiter(',')->expected(2, 64);
    app->add_option("--seed", c.seed, "seed for data generation, sampling and color draws")->capture_default_str();
    app->add_option("--out", c.out, "output directory");
}

void add_tree(CLI::App* app, Common& c) {
    auto* t = app->add_option("--tree", c.tree_file, "input tree in line format (default: average linkage)");
    app->add_option("--linkage", c.linkage_file, "input tree as a linkage matrix")->excludes(t);
}

HierarchyTree load_tree_file(const std::string& path, bool linkage) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return linkage ? read_linkage(in) : read_tree(in);
}

HierarchyTree input_tree(const Common& c, const LoadedInput& data) {
    HierarchyTree t;
    if (!c.tree_file.empty()) t = load_tree_file(c.tree_file, false);
    else if (!c.linkage_file.empty()) t = load_tree_file(c.linkage_file, true);
    else return build_average_linkage(data.graph);
    if (t.num_leaves() != data.graph.size()) {
        throw std::invalid_argument("tree has " + std::to_string(t.num_leaves()) + " leaves but the input has " +
                                    std::to_string(data.graph.size()) + " points");
    }
    return t;
}

// Writes `name` under --out, or does nothing without --out.
void save(const Common& c, const char* name, const std::string& body) {
    if (c.out.empty()) return;
    fs::create_directories(c.out);
    std::ofstream f(fs::path(c.out) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(c.out) / name).string());
    f << body;
}

std::string tree_text(const HierarchyTree& t) {
    std::ostringstream s;
    write_tree(s, t);
    return s.str();
}

std::string ledger_text(const OperationLedger& l) {
    std::ostringstream s;
    write_ledger(s, l);
    return s.str();
}

// Runs stages on the input tree, prints the report and writes tree, ledger
// and report under --out. Returns the exit code.
int run_stages(const Common& c, std::vector<StageConfig> stages, const char* label) {
    const auto data = load_input(c.input.spec(), c.seed);
    const auto before = input_tree(c, data);
    const auto run = run_pipeline(before, data.colors, stages, c.seed);

    const double ratio = ratio_cost(data.graph, before, run.tree);
    const double ceiling = run.ledger.certified_ceiling(data.graph);
    std::ostringstream rep;
    rep << "command: " << label << '\n'
        << "n: " << data.graph.size() << '\n'
        << "cost_input: " << fmt6(dasgupta_cost(before, data.graph)) << '\n'
        << "cost_output: " << fmt6(dasgupta_cost(run.tree, data.graph)) << '\n'
        << "ratio_cost: " << fmt6(ratio) << '\n'
        << "ceiling: " << fmt6(ceiling) << '\n'
        << "entries: " << run.ledger.entries().size() << '\n';
    for (OpKind k : {OpKind::rebalance, OpKind::del_ins, OpKind::abstract, OpKind::fold}) {
        rep << "max_separations_" << to_string(k) << ": " << run.ledger.max_separation_count(k) << '\n';
    }
    rep << "balance: " << to_string(run.balance) << '\n' << "fairness: " << to_string(run.fairness) << '\n';
    bool ok = run.balance != AuditState::failed && run.fairness != AuditState::failed && ratio <= ceiling * (1.0 + 1e-12);
    if (c.verify) {
        const auto v = verify_ledger(before, run.tree, data.graph, run.ledger);
        rep << "verify: " << (v.ok ? "pass" : "fail") << " entries=" << v.entries_checked << '\n';
        for (const auto& d : v.discrepancies) rep << "  " << d << '\n';
        ok = ok && v.ok;
    }
    std::istringstream notes(run.notes);
    for (std::string line; std::getline(notes, line);) rep << "note: " << line << '\n';
    rep << "status: " << (ok ? "pass" : "fail") << '\n';

    std::cout << rep.str();
    save(c, "report", rep.str());
    save(c, "tree.txt", tree_text(run.tree));
    save(c, "input_tree.txt", tree_text(before));
    save(c, "ledger.txt", ledger_text(run.ledger));
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair hierarchical clustering by auditable tree rewriting"};
    app.require_subcommand(1);

    Common c;

    auto* baseline = app.add_subcommand("build-baseline", "average-linkage tree of the input points");
    add_input(baseline, c);

    auto* rebalance = app.add_subcommand("rebalance", "make a binary tree 1/6-relatively balanced");
    add_input(rebalance, c);
    add_tree(rebalance, c);
    rebalance->add_flag("--verify", c.verify, "replay the ledger with the brute-force checker");

    std::string eps_text = "1/8";
    auto* refine = app.add_subcommand("refine", "tighten balance to epsilon (rebalancing first when needed)");
    add_input(refine, c);
    add_tree(refine, c);
    refine->add_option("--epsilon", eps_text, "balance parameter in (0, 1/6), e.g. 1/8")->capture_default_str();
    refine->add_flag("--verify", c.verify, "replay the ledger with the brute-force checker");

    StageConfig st;
    st.kind = StageConfig::Kind::stochastic;
    std::string mode_text = "depth";
    std::size_t trials = 1;
    auto* stochastic = app.add_subcommand("stochastic", "abstraction for randomly colored vertices");
    add_input(stochastic, c);
    add_tree(stochastic, c);
    stochastic->add_option("--epsilon", eps_text, "balance parameter")->capture_default_str();
    stochastic->add_option("--alpha", st.alpha, "lower color fraction")->capture_default_str();
    stochastic->add_option("--beta", st.beta, "upper color fraction")->capture_default_str();
    stochastic->add_option("--delta", st.delta_ch, "concentration slack in (0, 1)")->capture_default_str();
    stochastic->add_option("--mode", mode_text, "threshold mode")->check(CLI::IsMember({"depth", "size"}))->capture_default_str();
    stochastic->add_option("--p", st.probs, "per-color probabilities (default: data proportions)")->delimiter(',');
    stochastic->add_option("--trials", trials, "independent color draws, seeds seed..seed+trials-1")->capture_default_str();

    StageConfig fh;
    fh.kind = StageConfig::Kind::fairhc;
    double delta_exp = 0.0;
    auto* fair = app.add_subcommand("fairhc", "fair hierarchical clustering by abstraction and folding");
    fair->set_help_flag("--help", "print this help message and exit");  // -h would clash with --h
    add_input(fair, c);
    add_tree(fair, c);
    fair->add_option("--c", fh.fairhc.c_bal, "balance constant")->capture_default_str();
    auto* hopt = fair->add_option("--h", fh.fairhc.h, "frontier width, a power of two")->capture_default_str();
    fair->add_option("--delta", delta_exp, "frontier width as n^delta")->excludes(hopt);
    fair->add_option("--k", fh.fairhc.k, "fold group count")->capture_default_str();
    fair->add_option("--slack", fh.fairhc.fold_slack, "allowance on the fold bound")->capture_default_str();
    fair->add_option("--stop-size", fh.fairhc.stop_size, "cluster size at which levels stop (0: from colors)");
    fair->add_flag("--verify", c.verify, "replay the ledger with the brute-force checker");

    std::string alpha_text;
    std::string beta_text;
    auto* audit = app.add_subcommand("audit", "check balance and, with --alpha/--beta, fairness of a tree");
    add_input(audit, c);
    add_tree(audit, c);
    audit->add_option("--epsilon", eps_text, "balance parameter")->capture_default_str();
    audit->add_option("--alpha", st.alpha, "lower color fraction");
    audit->add_option("--beta", st.beta, "upper color fraction");

    std::string before_file;
    std::string after_file;
    std::string ledger_file;
    auto* verify = app.add_subcommand("verify", "replay an exported ledger against the input graph");
    add_input(verify, c);
    verify->add_option("--before", before_file, "tree the ledger starts from")->required();
    verify->add_option("--after", after_file, "tree the ledger ends at")->required();
    verify->add_option("--ledger", ledger_file, "ledger.txt written by another subcommand")->required();

    std::string config_file;
    auto* experiment = app.add_subcommand("experiment", "replicated pipeline runs from a JSON config");
    experiment->add_option("--config", config_file, "experiment config")->required();
    experiment->add_option("--out", c.out, "report directory")->required();
    std::optional<std::uint64_t> exp_seed;
    experiment->add_option("--seed", exp_seed, "override the config seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*baseline) {
            const auto data = load_input(c.input.spec(), c.seed);
            const auto text = tree_text(build_average_linkage(data.graph));
            if (c.out.empty()) std::cout << text;
            else save(c, "tree.txt", text);
            return 0;
        }
        if (*rebalance) {
            StageConfig s;
            s.kind = StageConfig::Kind::rebalance;
            return run_stages(c, {s}, "rebalance");
        }
        if (*refine) {
            const auto eps = Fraction::parse(eps_text);
            const auto data = load_input(c.input.spec(), c.seed);
            std::vector<StageConfig> stages;
            if (!relative_balance_audit(input_tree(c, data), Fraction{1, 6}).passed) stages.push_back({});
            StageConfig s;
            s.kind = StageConfig::Kind::refine;
            s.eps = eps;
            stages.push_back(s);
            return run_stages(c, stages, "refine");
        }
        if (*stochastic) {
            st.eps = Fraction::parse(eps_text);
            st.mode = parse_threshold_mode(mode_text);
            const auto data = load_input(c.input.spec(), c.seed);
            const auto before = input_tree(c, data);
            const auto fp = FairnessParams::uniform(data.colors.num_colors, st.alpha, st.beta);
            std::ostringstream rep;
            rep << "seed,result,worst_fraction\n";
            bool all = true;
            for (std::size_t i = 0; i < trials; ++i) {
                const std::uint64_t s = c.seed + i;
                const auto run = run_pipeline(before, data.colors, {st}, s);
                const auto a = fairness_audit(run.tree, run.colors, fp);
                const bool ok = a.passed && run.balance != AuditState::failed;
                all = all && ok;
                rep << s << ',' << (ok ? "pass" : "fail") << ',' << (a.passed ? "none" : fmt6(a.worst_fraction)) << '\n';
                if (i == 0) {
                    save(c, "tree.txt", tree_text(run.tree));
                    save(c, "ledger.txt", ledger_text(run.ledger));
                }
            }
            std::cout << rep.str();
            save(c, "trials.csv", rep.str());
            return all ? 0 : 1;
        }
        if (*fair) {
            if (delta_exp != 0.0) fh.delta_exp = delta_exp;
            return run_stages(c, {fh}, "fairhc");
        }
        if (*audit) {
            const auto eps = Fraction::parse(eps_text);
            const auto data = load_input(c.input.spec(), c.seed);
            const auto t = input_tree(c, data);
            const auto b = relative_balance_audit(t, eps);
            std::ostringstream rep;
            rep << "n: " << t.num_leaves() << '\n'
                << "balance_epsilon: " << eps.to_string() << '\n'
                << "balance: " << (b.passed ? "pass" : "fail") << " max_deviation=" << fmt6(b.max_deviation)
                << " violations=" << b.violations.size() << " multiway=" << b.multiway_nodes.size() << '\n';
            bool ok = b.passed;
            if (audit->count("--alpha") + audit->count("--beta") > 0) {
                const auto fp = FairnessParams::uniform(data.colors.num_colors, st.alpha, st.beta);
                const auto f = fairness_audit(t, data.colors, fp);
                rep << "fairness: " << (f.passed ? "pass" : "fail") << " violations=" << f.violations.size();
                if (!f.passed) rep << " worst_fraction=" << fmt6(f.worst_fraction);
                rep << '\n';
                ok = ok && f.passed;
            }
            rep << "monochromatic_clusters: " << monochromatic_clusters(t, data.colors) << '\n'
                << "status: " << (ok ? "pass" : "fail") << '\n';
            std::cout << rep.str();
            save(c, "report", rep.str());
            return ok ? 0 : 1;
        }
        if (*verify) {
            const auto data = load_input(c.input.spec(), c.seed);
            const auto before = load_tree_file(before_file, false);
            const auto after = load_tree_file(after_file, false);
            std::ifstream lin(ledger_file);
            if (!lin) throw std::runtime_error("cannot open " + ledger_file);
            const auto lines = read_ledger(lin);
            const auto v = verify_exported_ledger(before, after, data.graph, lines);
            std::ostringstream rep;
            rep << "entries: " << v.entries_checked << '/' << lines.size() << '\n';
            for (const auto& d : v.discrepancies) rep << "discrepancy: " << d << '\n';
            rep << "status: " << (v.ok ? "pass" : "fail") << '\n';
            std::cout << rep.str();
            save(c, "report", rep.str());
            return v.ok ? 0 : 1;
        }
        if (*experiment) {
            std::ifstream in(config_file);
            if (!in) throw std::runtime_error("cannot open " + config_file);
            auto cfg = parse_experiment_config(in);
            if (exp_seed) cfg.seed = *exp_seed;
            const auto rep = run_experiment(cfg);
            emit_reports(rep, c.out);
            std::ifstream summary(fs::path(c.out) / "report");
            std::cout << summary.rdbuf();
            return rep.all_passed() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
