// lewisreg: command-line front end.
//
//   lewisreg gen     --family random --n 2000 --d 5 --matrix A.csv --labels y.csv --out manifest.json
//   lewisreg lewis   --matrix A.csv --p 1 --out w.csv
//   lewisreg plan    --matrix A.csv --p 1 --scheme bernoulli-l1 --eps 0.25 --out plan.json
//   lewisreg realize --plan plan.json --seed 7 --out sketch.csv
//   lewisreg solve   --matrix A.csv --labels y.csv --p 1 --sketch sketch.csv
//   lewisreg verify  --check ruc --matrix A.csv --labels y.csv --sketch sketch.csv --eps 0.25
//   lewisreg run     --preset l1-accept --out report.json
//   lewisreg sweep   --preset l1-accept --axis m --values 250,500,1000 --out sweep.csv
//
// Exit codes: 0 success (and every configured pass criterion met), 1 runtime
// failure or failed criterion, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lewisreg/errors.hpp"
#include "lewisreg/experiment.hpp"
#include "lewisreg/instances.hpp"
#include "lewisreg/lewis.hpp"
#include "lewisreg/matrix_io.hpp"
#include "lewisreg/oracle.hpp"
#include "lewisreg/sampling.hpp"
#include "lewisreg/solvers.hpp"
#include "lewisreg/verify.hpp"

using namespace lewisreg;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> to_std(const DenseVector& v)
{
    return {v.data(), v.data() + v.size()};
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    out << text;
}

void emit(const json& j, const std::string& path)
{
    const std::string text = j.dump(2) + "\n";
    if (!path.empty())
        write_text(path, text);
    std::cout << text;
}

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("'" + path + "': " + e.what());
    }
}

void write_sketch(const std::string& path, const Sketch& sk)
{
    std::ostringstream out;
    out.precision(17);
    out << "index,weight\n";
    for (const auto& e : sk.entries)
        out << e.row << ',' << e.weight << '\n';
    write_text(path, out.str());
}

Sketch read_sketch(const std::string& path, Index n)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open '" + path + "'");
    Sketch sk;
    sk.n = n;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("index", 0) == 0)
            continue;
        std::istringstream row(line);
        Index i = 0;
        char comma = 0;
        double w = 0.0;
        if (!(row >> i >> comma >> w) || comma != ',')
            throw FormatError("sketch '" + path + "': bad line '" + line + "'");
        if (i < 0 || i >= n)
            throw IndexError("sketch '" + path + "': row " + std::to_string(i) + " out of range");
        if (!sk.entries.empty() && i <= sk.entries.back().row)
            throw FormatError("sketch '" + path + "': rows must be strictly increasing");
        if (!(w > 0.0))
            throw FormatError("sketch '" + path + "': weights must be positive");
        sk.entries.push_back({i, w});
    }
    return sk;
}

json plan_to_json(const SamplePlan& plan, double delta)
{
    return {{"schema", "lewisreg.plan/1"},
            {"scheme", to_string(plan.scheme)},
            {"n", plan.n},
            {"d", plan.d},
            {"u", plan.u},
            {"m", plan.m},
            {"gamma", plan.gamma},
            {"expected_support", plan.expected_support()},
            {"support_bound", support_size_bound(plan, delta)},
            {"delta", delta},
            {"hash", plan_hash(plan)},
            {"params", to_std(plan.params)}};
}

SamplePlan plan_from_json(const json& j)
{
    SamplePlan plan;
    plan.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    plan.n = j.at("n").get<Index>();
    plan.d = j.at("d").get<Index>();
    plan.u = j.at("u").get<double>();
    plan.m = j.at("m").get<double>();
    plan.gamma = j.at("gamma").get<double>();
    const auto params = j.at("params").get<std::vector<double>>();
    if (Index(params.size()) != plan.n)
        throw FormatError("plan: params length differs from n");
    plan.params = Eigen::Map<const DenseVector>(params.data(), Index(params.size()));
    return plan;
}

// Options shared by several subcommands.
struct Opts {
    std::string matrix, labels, out, sketch, plan, config, preset, family = "random", check, axis, values;
    double p = 1.0, eps = 0.25, delta = 0.1, c_u = 1.0, c_m = 1.0, noise = 1.0, outlier_scale = 1e4, slack = 1e-3,
           tol = 1e-8;
    std::optional<double> m;
    std::string scheme = "bernoulli-l1";
    Index n = 1000, d = 5, outliers = 0, trials = 100, samples = 1000000;
    std::optional<Index> budget;
    std::uint64_t seed = 0;
    int threads = 1, betas = 1000, starts = 8, directions = 2000, max_iter = 500, ruc_betas = 0;
    bool reveal = false, binary = false, coherent = false, fixed_instance = false;
};

RegressionInstance load_instance(const Opts& o)
{
    if (o.matrix.empty() || o.labels.empty())
        throw UsageError("--matrix and --labels are required");
    return RegressionInstance(read_matrix(o.matrix), read_vector(o.labels), o.p);
}

int cmd_gen(const Opts& o)
{
    if (o.matrix.empty() || o.labels.empty())
        throw UsageError("gen needs --matrix and --labels output paths");
    json manifest{{"schema", "lewisreg.manifest/1"},
                  {"family", o.family},
                  {"seed", o.seed},
                  {"matrix", o.matrix},
                  {"labels", o.labels}};
    if (o.family == "lower-bound") {
        if (o.d < 1 || o.n % o.d != 0)
            throw UsageError("lower-bound needs --d dividing --n");
        if (!(o.eps > 0.0 && o.eps <= 0.5))
            throw UsageError("lower-bound needs --eps in (0, 0.5]");
        const auto lb = gen_lower_bound(o.n, o.d, o.eps, std::nullopt, o.seed);
        write_matrix(o.matrix, lb.instance.A(), o.binary);
        write_vector(o.labels, lb.instance.reveal_for_analysis());
        manifest["params"] = {{"n", o.n}, {"d", o.d}, {"eps", o.eps}, {"p", 1.0}};
        if (o.reveal)
            manifest["b"] = std::vector<int>(lb.b.data(), lb.b.data() + lb.b.size());
    } else if (o.family == "random" || o.family == "coherent") {
        if (o.d < 1 || o.n < o.d)
            throw UsageError("need --n >= --d >= 1");
        const NoiseSpec noise{o.noise > 0.0 ? NoiseKind::gaussian : NoiseKind::none, o.noise};
        const auto ri = gen_random(o.n, o.d, o.p, noise, {o.outliers, o.outlier_scale}, o.seed,
                                   o.family == "coherent");
        write_matrix(o.matrix, ri.instance.A(), o.binary);
        write_vector(o.labels, ri.instance.reveal_for_analysis());
        manifest["params"] = {{"n", o.n},          {"d", o.d},
                              {"p", o.p},          {"noise_scale", o.noise},
                              {"outliers", o.outliers}, {"outlier_magnitude", o.outlier_scale}};
        if (o.reveal) {
            manifest["beta0"] = to_std(ri.beta0);
            manifest["outlier_rows"] = ri.outlier_rows;
        }
    } else {
        throw UsageError("unknown family '" + o.family + "'");
    }
    emit(manifest, o.out);
    return 0;
}

int cmd_lewis(const Opts& o)
{
    if (o.matrix.empty())
        throw UsageError("--matrix is required");
    const DenseMatrix A = read_matrix(o.matrix);
    const LewisWeights lw = lewis_weights(A, o.p, o.tol, o.max_iter);
    const json summary{{"p", lw.p},
                       {"gamma", lw.gamma},
                       {"residual", lw.residual},
                       {"iterations", lw.iterations},
                       {"converged", lw.converged},
                       {"sum", lw.w.sum()}};
    if (!o.out.empty()) {
        write_vector(o.out, lw.w);
        write_text(o.out + ".json", summary.dump(2) + "\n");
    }
    std::cout << summary.dump(2) << "\n";
    return lw.converged ? 0 : 1;
}

SamplePlan build_plan(const Opts& o, const DenseMatrix& A)
{
    const Scheme scheme = scheme_from_string(o.scheme);
    if (scheme == Scheme::uniform) {
        if (!o.m)
            throw UsageError("the uniform scheme needs --m");
        return plan_uniform(A.rows(), A.cols(), Index(std::ceil(*o.m)));
    }
    const LewisWeights lw = lewis_weights(A, o.p, o.tol, o.max_iter);
    if (scheme == Scheme::bernoulli_l1) {
        std::optional<double> u;
        if (o.m)
            u = threshold_for_support(lw.gamma, A.cols(), *o.m);
        return plan_l1(lw.w, lw.gamma, o.eps, o.delta, A.cols(), u, o.c_u);
    }
    return plan_lp(lw.w, lw.gamma, o.eps, o.delta, A.cols(), o.p, o.m, o.c_m);
}

int cmd_plan(const Opts& o)
{
    if (o.matrix.empty())
        throw UsageError("--matrix is required");
    const SamplePlan plan = build_plan(o, read_matrix(o.matrix));
    json j = plan_to_json(plan, o.delta);
    if (!o.out.empty())
        write_text(o.out, j.dump(2) + "\n");
    j.erase("params");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_realize(const Opts& o)
{
    if (o.plan.empty())
        throw UsageError("--plan is required");
    const SamplePlan plan = plan_from_json(read_json(o.plan));
    const Sketch sk = realize(plan, o.seed);
    if (!o.out.empty())
        write_sketch(o.out, sk);
    std::cout << json{{"support", sk.support()}, {"seed", o.seed}, {"plan_hash", sk.plan_hash}}.dump(2) << "\n";
    return 0;
}

int cmd_solve(const Opts& o)
{
    const RegressionInstance inst = load_instance(o);
    json j{{"p", o.p}};
    SolveResult res;
    if (o.sketch.empty()) {
        res = solve_weighted(inst.A(), inst.reveal_for_analysis(), DenseVector::Ones(inst.rows()), o.p);
    } else {
        // Only the support labels are read.
        const Sketch sk = read_sketch(o.sketch, inst.rows());
        QueryLedger ledger(o.budget);
        DenseMatrix As(Index(sk.support()), inst.cols());
        DenseVector ys(As.rows()), ss(As.rows());
        for (Index k = 0; k < As.rows(); ++k) {
            const auto& e = sk.entries[std::size_t(k)];
            As.row(k) = inst.A().row(e.row);
            ys(k) = query(inst, ledger, e.row);
            ss(k) = e.weight;
        }
        res = solve_weighted(As, ys, ss, o.p);
        j["queries"] = ledger.size();
    }
    j["beta"] = to_std(res.beta);
    j["objective"] = res.objective;
    j["status"] = to_string(res.status);
    j["iterations"] = res.iterations;
    j["kkt_residual"] = res.kkt_residual;
    emit(j, o.out);
    return res.status == SolveStatus::degenerate ? 1 : 0;
}

int cmd_verify(const Opts& o)
{
    json j{{"check", o.check}};
    bool ok = true;
    if (o.check == "taylor") {
        const TaylorReport r = taylor_claim_check(o.p, o.samples, o.seed);
        j.update({{"p", r.p}, {"samples", r.samples}, {"sup_ratio", r.sup_ratio}, {"argmax_ratio", r.argmax_ratio},
                  {"finite", r.finite}});
        ok = r.finite;
    } else if (o.check == "sandwich") {
        if (o.matrix.empty())
            throw UsageError("--matrix is required");
        const DenseMatrix A = read_matrix(o.matrix);
        const LewisWeights lw = lewis_weights(A, o.p, o.tol, o.max_iter);
        const ImportanceWeights iw = importance_weights(A, o.p, o.starts, o.seed);
        const SandwichReport r = sandwich_check(A, o.p, lw, iw, o.slack);
        j.update({{"p", r.p},
                  {"rows_checked", r.rows_checked},
                  {"violations", r.violations.size()},
                  {"min_lower_ratio", r.min_lower_ratio},
                  {"max_upper_ratio", r.max_upper_ratio},
                  {"ok", r.ok()}});
        ok = r.ok();
    } else if (o.check == "embed") {
        if (o.matrix.empty() || o.sketch.empty())
            throw UsageError("--matrix and --sketch are required");
        const DenseMatrix A = read_matrix(o.matrix);
        const EmbedReport r = embedding_check(A, read_sketch(o.sketch, A.rows()), o.p, o.eps, o.directions, o.seed);
        j.update({{"p", r.p}, {"directions", r.directions}, {"max_ratio_dev", r.max_ratio_dev}, {"pass", r.pass}});
        ok = r.pass;
    } else if (o.check == "ruc" || o.check == "cross") {
        if (o.sketch.empty())
            throw UsageError("--sketch is required");
        const RegressionInstance inst = load_instance(o);
        const Sketch sk = read_sketch(o.sketch, inst.rows());
        const SolveResult full =
            solve_weighted(inst.A(), inst.reveal_for_analysis(), DenseVector::Ones(inst.rows()), o.p);
        if (o.check == "ruc") {
            BetaSampling sampling;
            sampling.betas = o.betas;
            sampling.delta = o.delta;
            sampling.seed = o.seed;
            const RucReport r = ruc_check(inst, sk, full.beta, sampling, o.eps);
            j.update({{"eps", o.eps},
                      {"delta_value", r.delta_value.front()},
                      {"corrected", r.max_rel_violation.front()},
                      {"uncorrected", r.max_uncorrected.front()},
                      {"pass", r.pass_fraction == 1.0}});
            ok = r.pass_fraction == 1.0;
        } else {
            const LewisWeights lw = lewis_weights(inst.A(), o.p, o.tol, o.max_iter);
            const DenseVector yc = inst.reveal_for_analysis() - inst.A() * full.beta;
            const double m = o.m ? *o.m : double(sk.support());
            const CrossTermReport r = cross_term_check(inst.A(), yc, sk, o.p, o.betas, o.seed, lw.gamma, o.delta, m);
            j.update({{"p", r.p},
                      {"optimality_residual", r.optimality_residual},
                      {"max_ratio", r.max_ratio},
                      {"bound_scale", r.bound_scale},
                      {"fitted_constant", r.fitted_constant}});
        }
    } else {
        throw UsageError("--check must be one of ruc, embed, cross, taylor, sandwich");
    }
    emit(j, o.out);
    return ok ? 0 : 1;
}

ExperimentConfig experiment_config(const Opts& o, const CLI::App& sub)
{
    ExperimentConfig c;
    if (!o.config.empty())
        c = config_from_json(read_json(o.config));
    else if (!o.preset.empty())
        c = preset(o.preset);
    auto given = [&sub](const char* name) { return sub.count(name) > 0; };
    if (given("--family")) c.family = o.family;
    if (given("--n")) c.n = o.n;
    if (given("--d")) c.d = o.d;
    if (given("--p")) c.p = o.p;
    if (given("--eps")) c.eps = o.eps;
    if (given("--delta")) c.delta = o.delta;
    if (given("--scheme")) c.scheme = scheme_from_string(o.scheme);
    if (given("--c-u")) c.c_u = o.c_u;
    if (given("--c-m")) c.c_m = o.c_m;
    if (given("--m")) c.m = o.m;
    if (given("--trials")) c.trials = o.trials;
    if (given("--seed")) c.seed = o.seed;
    if (given("--budget")) c.budget = o.budget;
    if (given("--outliers")) c.outliers = o.outliers;
    if (given("--noise")) c.noise_scale = o.noise;
    if (given("--ruc-betas")) c.ruc_betas = o.ruc_betas;
    if (given("--fixed-instance")) c.fixed_instance = o.fixed_instance;
    if (given("--threads")) c.threads = o.threads;
    c.output = o.out;
    c.validate();
    return c;
}

int cmd_run(const Opts& o, const CLI::App& sub)
{
    const ExperimentConfig c = experiment_config(o, sub);
    const ExperimentReport r = run_experiment(c);
    const json j = to_json(r);
    if (!o.out.empty())
        write_text(o.out, j.dump(2) + "\n");
    std::cout << json{{"pass", r.pass},
                      {"pass_fraction", r.pass_fraction},
                      {"median_ratio", r.median_ratio},
                      {"trials", r.trials.size()},
                      {"wall_seconds", r.wall_seconds}}
                     .dump(2)
              << "\n";
    return r.pass ? 0 : 1;
}

std::vector<double> parse_values(const std::string& text)
{
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad --values entry '" + item + "'");
        }
    }
    if (out.empty())
        throw UsageError("--values is empty");
    return out;
}

int cmd_sweep(const Opts& o, const CLI::App& sub)
{
    ExperimentConfig c = experiment_config(o, sub);
    const SweepAxis axis = sweep_axis_from_string(o.axis);
    const std::vector<double> values = parse_values(o.values);
    const auto reports = sweep(c, axis, values);
    const std::string csv = sweep_csv(axis, values, reports);
    if (!o.out.empty()) {
        write_text(o.out, csv);
        json all = json::array();
        for (const auto& r : reports)
            all.push_back(to_json(r));
        write_text(o.out + ".json", all.dump(2) + "\n");
    }
    std::cout << csv;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Query-efficient lp regression via Lewis-weight sampling"};
    app.set_version_flag("--version", std::string(LEWISREG_VERSION));
    app.require_subcommand(1);
    Opts o;

    auto add_common = [&o](CLI::App* s) {
        s->add_option("--matrix", o.matrix, "Design matrix (CSV or binary)");
        s->add_option("--labels", o.labels, "Label vector (CSV)");
        s->add_option("--p", o.p, "Loss exponent in [1, 2]");
        s->add_option("--eps", o.eps, "Accuracy parameter");
        s->add_option("--delta", o.delta, "Failure probability");
        s->add_option("--seed", o.seed, "Random seed");
        s->add_option("--out", o.out, "Output path");
        s->add_option("--threads", o.threads, "Worker threads");
    };
    auto add_plan_opts = [&o](CLI::App* s) {
        s->add_option("--scheme", o.scheme, "bernoulli-l1, poisson-lp or uniform");
        s->add_option("--c-u", o.c_u, "Constant in the Bernoulli threshold");
        s->add_option("--c-m", o.c_m, "Constant in the Poisson budget");
        s->add_option("--m", o.m, "Target support (overrides the default)");
    };
    auto add_experiment_opts = [&o](CLI::App* s) {
        s->add_option("--preset", o.preset, "l1-accept or lp-accept");
        s->add_option("--config", o.config, "Experiment config JSON");
        s->add_option("--family", o.family, "random, coherent or lower-bound");
        s->add_option("--n", o.n, "Rows");
        s->add_option("--d", o.d, "Columns");
        s->add_option("--trials", o.trials, "Number of trials");
        s->add_option("--budget", o.budget, "Label budget per trial");
        s->add_option("--outliers", o.outliers, "Planted outliers");
        s->add_option("--noise", o.noise, "Gaussian noise scale");
        s->add_option("--ruc-betas", o.ruc_betas, "Betas for the uniform convergence check (0 = off)");
        s->add_flag("--fixed-instance", o.fixed_instance, "Reuse one instance across trials");
    };

    auto* gen = app.add_subcommand("gen", "Generate an instance");
    add_common(gen);
    gen->add_option("--family", o.family, "random, coherent or lower-bound");
    gen->add_option("--n", o.n, "Rows");
    gen->add_option("--d", o.d, "Columns");
    gen->add_option("--noise", o.noise, "Gaussian noise scale (0 = none)");
    gen->add_option("--outliers", o.outliers, "Planted outliers");
    gen->add_option("--outlier-scale", o.outlier_scale, "Outlier magnitude in noise units");
    gen->add_flag("--reveal", o.reveal, "Write hidden parameters to the manifest (testing only)");
    gen->add_flag("--binary", o.binary, "Write the matrix in binary format");

    auto* lewis = app.add_subcommand("lewis", "Compute lp Lewis weights");
    add_common(lewis);
    lewis->add_option("--tol", o.tol, "Fixed-point tolerance");
    lewis->add_option("--max-iter", o.max_iter, "Iteration cap");

    auto* plan = app.add_subcommand("plan", "Build a sampling plan");
    add_common(plan);
    add_plan_opts(plan);

    auto* realize_cmd = app.add_subcommand("realize", "Draw a sketch from a plan");
    add_common(realize_cmd);
    realize_cmd->add_option("--plan", o.plan, "Plan JSON")->required();

    auto* solve = app.add_subcommand("solve", "Minimize the (sketched) loss");
    add_common(solve);
    solve->add_option("--sketch", o.sketch, "Sketch CSV (index,weight)");
    solve->add_option("--budget", o.budget, "Label budget");

    auto* verify = app.add_subcommand("verify", "Run an empirical certificate");
    add_common(verify);
    verify->add_option("--check", o.check, "ruc, embed, cross, taylor or sandwich")->required();
    verify->add_option("--sketch", o.sketch, "Sketch CSV (index,weight)");
    verify->add_option("--betas", o.betas, "Sampled betas");
    verify->add_option("--directions", o.directions, "Sampled directions (embed)");
    verify->add_option("--samples", o.samples, "Sampled pairs (taylor)");
    verify->add_option("--starts", o.starts, "Random starts per row (sandwich)");
    verify->add_option("--slack", o.slack, "Relative slack (sandwich)");
    verify->add_option("--m", o.m, "Budget used for the cross-term scale");

    auto* run = app.add_subcommand("run", "Run an experiment");
    add_common(run);
    add_plan_opts(run);
    add_experiment_opts(run);

    auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment over a range of one parameter");
    add_common(sweep_cmd);
    add_plan_opts(sweep_cmd);
    add_experiment_opts(sweep_cmd);
    sweep_cmd->add_option("--axis", o.axis, "m, eps or c_u")->required();
    sweep_cmd->add_option("--values", o.values, "Comma-separated ascending values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) return cmd_gen(o);
        if (*lewis) return cmd_lewis(o);
        if (*plan) return cmd_plan(o);
        if (*realize_cmd) return cmd_realize(o);
        if (*solve) return cmd_solve(o);
        if (*verify) return cmd_verify(o);
        if (*run) return cmd_run(o, *run);
        if (*sweep_cmd) return cmd_sweep(o, *sweep_cmd);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
