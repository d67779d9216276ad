// filtop: inference and evaluation pipeline for coarse-grid filtered
// convection operators. Subcommands: generate, fit, eval, sweep, long,
// gradcheck. Exit codes: 0 ok, 1 validation error, 2 numerical failure,
// 3 I/O error.

#include "filtop/adjoint.hpp"
#include "filtop/config.hpp"
#include "filtop/csv.hpp"
#include "filtop/dns.hpp"
#include "filtop/errors.hpp"
#include "filtop/eval.hpp"
#include "filtop/inference.hpp"
#include "filtop/matrix_io.hpp"
#include "filtop/rng.hpp"
#include "filtop/svg.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace filtop;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
};

ExperimentConfig load_effective_config(const CommonOptions& common) {
    ExperimentConfig cfg;
    if (!common.config_path.empty()) cfg = load_config(common.config_path);
    for (const std::string& kv : common.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ValidationError("--set expects key=value, got '" + kv + "'");
        apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("-c,--config", common.config_path, "configuration file (key = value lines)");
    cmd->add_option("--set", common.overrides, "override a config field, e.g. --set seed=3")
        ->take_all();
}

std::string dataset_file(const fs::path& dir, const std::string& name, const std::string& part) {
    return (dir / (name + "_" + part + ".dfm")).string();
}

struct LoadedSet {
    SnapshotSet set;
    bool has_fine = false;
};

LoadedSet load_snapshot_set(const fs::path& dir, const std::string& name, bool need_fine) {
    LoadedSet loaded;
    SnapshotSet& s = loaded.set;
    const fs::path manifest_path = dir / (name + "_manifest.txt");
    int n_ic = -1, n_t = -1;
    for (const auto& [key, value] : read_manifest(manifest_path)) {
        if (key == "n_ic") n_ic = std::stoi(value);
        if (key == "n_t") n_t = std::stoi(value);
    }
    if (n_ic < 1 || n_t < 1)
        throw IoError("manifest " + manifest_path.string() + " lacks n_ic/n_t");
    s.n_ic = n_ic;
    s.n_t = n_t;

    s.Ubar = read_matrix(dataset_file(dir, name, "Ubar"));
    s.Ubar_dot = read_matrix(dataset_file(dir, name, "Ubar_dot"));
    const Matrix times = read_matrix(dataset_file(dir, name, "times"));
    s.times.assign(times.data(), times.data() + times.size());
    if (static_cast<int>(s.times.size()) != s.columns() || s.Ubar.cols() != s.columns())
        throw ValidationError("dataset " + name + ": shapes disagree with the manifest");
    if (need_fine) {
        s.U = read_matrix(dataset_file(dir, name, "U"));
        s.Udot = read_matrix(dataset_file(dir, name, "Udot"));
        if (s.U.cols() != s.columns())
            throw ValidationError("dataset " + name + ": fine snapshot shape mismatch");
        loaded.has_fine = true;
    }
    return loaded;
}

void write_dataset(const fs::path& dir, const std::string& name, const SnapshotSet& s,
                   const ExperimentConfig& cfg, const DatasetParams& params) {
    write_matrix(dataset_file(dir, name, "U"), s.U);
    write_matrix(dataset_file(dir, name, "Udot"), s.Udot);
    write_matrix(dataset_file(dir, name, "Ubar"), s.Ubar);
    write_matrix(dataset_file(dir, name, "Ubar_dot"), s.Ubar_dot);
    Matrix times(static_cast<Eigen::Index>(s.times.size()), 1);
    for (size_t i = 0; i < s.times.size(); ++i) times(static_cast<Eigen::Index>(i), 0) = s.times[i];
    write_matrix(dataset_file(dir, name, "times"), times);
    write_manifest(dir / (name + "_manifest.txt"),
                   {{"dataset", name},
                    {"n_ic", std::to_string(params.n_ic)},
                    {"n_t", std::to_string(params.n_t)},
                    {"horizon", format_double(params.horizon)},
                    {"n_fine", std::to_string(cfg.n_fine)},
                    {"m_coarse", std::to_string(cfg.m_coarse)},
                    {"filter", filter_name(cfg.filter)},
                    {"h0", format_double(cfg.h0)},
                    {"seed", std::to_string(cfg.seed)},
                    {"U_shape", std::to_string(s.U.rows()) + "x" + std::to_string(s.U.cols())},
                    {"Ubar_shape",
                     std::to_string(s.Ubar.rows()) + "x" + std::to_string(s.Ubar.cols())}});
}

Matrix load_operator(const std::string& path, const ExperimentConfig& cfg) {
    if (path == "baseline") {
        return convection_operator(make_grid(cfg.m_coarse)).dense();
    }
    return read_matrix(path);
}

int cmd_generate(const CommonOptions& common, const std::string& which, const std::string& out) {
    const ExperimentConfig cfg = load_effective_config(common);
    const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
    fs::create_directories(dir);

    const Grid fine = make_grid(cfg.n_fine);
    const Grid coarse = make_grid(cfg.m_coarse);
    const FilterMatrix filter = build_filter_matrix(cfg.filter_spec(), coarse, fine);

    std::vector<DatasetName> names;
    if (which == "all") {
        names = {DatasetName::Train, DatasetName::Valid, DatasetName::Test, DatasetName::Long};
    } else {
        names = {parse_dataset_name(which)};
    }
    for (DatasetName name : names) {
        const DatasetParams params = cfg.params_for(name);
        std::cerr << "generating " << dataset_id(name) << " (n_ic=" << params.n_ic
                  << ", n_t=" << params.n_t << ", T=" << params.horizon << ")\n";
        const SnapshotSet set =
            generate_dataset(name, filter, cfg.ic_spec(params.n_ic), cfg.solver, params);
        write_dataset(dir, dataset_id(name), set, cfg, params);
    }
    save_config(cfg, dir / "config.txt");
    return 0;
}

int cmd_fit(const CommonOptions& common, const std::string& route_name_arg, const std::string& data,
            const std::string& out, const std::string& train_name, const std::string& valid_name,
            std::optional<double> lambda, std::optional<double> lambda_prior,
            std::optional<double> lambda_stab, bool full_grid) {
    const ExperimentConfig cfg = load_effective_config(common);
    const Route route = parse_route(route_name_arg);
    const fs::path data_dir(data);
    const fs::path out_dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
    fs::create_directories(out_dir);

    const Grid fine = make_grid(cfg.n_fine);
    const Grid coarse = make_grid(cfg.m_coarse);
    const FilterMatrix filter = build_filter_matrix(cfg.filter_spec(), coarse, fine);
    const CirculantOperator a_fine = convection_operator(fine);

    FitContext ctx;
    ctx.filter = &filter;
    ctx.a_fine = &a_fine;
    ctx.a_coarse = convection_operator(coarse).dense();
    ctx.d_coarse = diffusion_operator(coarse).dense();
    ctx.solver = cfg.solver;
    ctx.optimizer = cfg.optimizer;

    const LoadedSet train = load_snapshot_set(data_dir, train_name, route == Route::Intrusive);
    const LoadedSet valid = load_snapshot_set(data_dir, valid_name, false);
    if (train.set.Ubar.rows() != cfg.m_coarse)
        throw ValidationError("fit: dataset coarse dimension does not match m_coarse");

    GridSearchResult result;
    const bool pinned = lambda.has_value() || lambda_prior.has_value() || lambda_stab.has_value();
    if (pinned) {
        InferredOperator op;
        if (route == Route::Intrusive) {
            const double l = lambda.value_or(0.0);
            Matrix recon = fit_reconstruction(train.set.Ubar, train.set.U, l);
            op = intrusive_operator(filter, a_fine, recon);
            op.lambda = l;
        } else if (route == Route::DerivativeFit) {
            op = fit_derivative(train.set.Ubar, train.set.Ubar_dot, ctx.a_coarse, ctx.d_coarse,
                                lambda_prior.value_or(0.0), lambda_stab.value_or(0.0));
        } else {
            op = fit_embedded(train.set, ctx.a_coarse, ctx.d_coarse, lambda_prior.value_or(0.0),
                              lambda_stab.value_or(0.0), cfg.optimizer);
        }
        GridPoint point;
        point.lambda_prior = route == Route::Intrusive ? op.lambda : op.lambda_prior;
        point.lambda_stab = op.lambda_stab;
        point.valid_error = time_averaged_error(error_curve(op.matrix, valid.set, cfg.solver));
        result.best = std::move(op);
        result.table = {point};
    } else {
        const auto& grid = route == Route::Embedded && !full_grid ? cfg.emb_lambda_grid
                                                                  : cfg.lambda_grid;
        result = grid_search(route, train.set, valid.set, grid, ctx);
    }

    const std::string stem = route_name(route);
    write_matrix(out_dir / (stem + "_operator.dfm"), result.best.matrix);
    write_grid_table_csv(out_dir / (stem + "_grid.csv"), result.table);
    if (route == Route::Intrusive) {
        // Keep the selected reconstruction alongside the operator.
        Matrix recon = fit_reconstruction(train.set.Ubar, train.set.U, result.best.lambda);
        write_matrix(out_dir / "intrusive_R.dfm", recon);
    }

    double best_valid = std::numeric_limits<double>::infinity();
    for (const GridPoint& p : result.table) best_valid = std::min(best_valid, p.valid_error);
    write_manifest(out_dir / (stem + "_manifest.txt"),
                   {{"route", stem},
                    {"lambda", format_double(result.best.lambda)},
                    {"lambda_prior", format_double(result.best.lambda_prior)},
                    {"lambda_stab", format_double(result.best.lambda_stab)},
                    {"valid_error", format_double(best_valid)},
                    {"commutator_error",
                     format_double(commutator_error(result.best.matrix, ctx.a_coarse))},
                    {"train_data", (data_dir / train_name).string()},
                    {"m_coarse", std::to_string(cfg.m_coarse)},
                    {"seed", std::to_string(cfg.seed)}});
    std::cerr << "fit " << stem << ": validation error " << format_double(best_valid) << "\n";
    return 0;
}

int cmd_eval(const CommonOptions& common, const std::string& op_path, const std::string& data,
             const std::string& dataset, const std::string& out_csv, const std::string& out_svg,
             bool log_y, const std::string& label) {
    const ExperimentConfig cfg = load_effective_config(common);
    const LoadedSet set = load_snapshot_set(fs::path(data), dataset, false);
    const Matrix op = load_operator(op_path, cfg);

    ErrorCurve curve = error_curve(op, set.set, cfg.solver);
    curve.dataset = dataset;
    curve.route = label.empty() ? (op_path == "baseline" ? "baseline" : fs::path(op_path).stem().string())
                                : label;

    const fs::path csv_path = out_csv.empty()
                                  ? fs::path(cfg.output_dir) / ("eval_" + curve.route + ".csv")
                                  : fs::path(out_csv);
    fs::create_directories(csv_path.parent_path().empty() ? "." : csv_path.parent_path());
    write_error_curve_csv(csv_path, curve);
    if (!out_svg.empty()) {
        PlotOptions opt;
        opt.title = curve.route + " on " + dataset;
        opt.log_y = log_y;
        write_line_plot(out_svg, {{curve.route, curve.times, curve.errors}}, opt);
    }
    std::cout << "time_averaged_error = " << format_double(time_averaged_error(curve)) << "\n";
    return 0;
}

int cmd_sweep(const CommonOptions& common, const std::vector<std::string>& routes,
              const std::vector<std::string>& filters, const std::string& out) {
    const ExperimentConfig cfg = load_effective_config(common);
    const fs::path out_dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
    fs::create_directories(out_dir);

    const Grid fine = make_grid(cfg.n_fine);
    std::cerr << "generating fine datasets (train/valid/test)\n";
    const FineDataset train =
        generate_fine_dataset(DatasetName::Train, fine, cfg.ic_spec(cfg.train.n_ic), cfg.solver, cfg.train);
    const FineDataset valid =
        generate_fine_dataset(DatasetName::Valid, fine, cfg.ic_spec(cfg.valid.n_ic), cfg.solver, cfg.valid);
    const FineDataset test =
        generate_fine_dataset(DatasetName::Test, fine, cfg.ic_spec(cfg.test.n_ic), cfg.solver, cfg.test);

    SweepRequest req;
    req.m_values = cfg.m_list;
    req.routes = routes;
    req.filters.clear();
    for (const std::string& f : filters) req.filters.push_back(parse_filter_kind(f));
    req.filter_spec = cfg.filter_spec();
    req.lambda_grid = cfg.lambda_grid;
    req.embedded_lambda_grid = cfg.emb_lambda_grid;
    req.solver = cfg.solver;
    req.optimizer = cfg.optimizer;

    const SweepResult result = convergence_sweep(fine, train, valid, test, req);
    write_sweep_csv(out_dir / "sweep.csv", result);
    save_config(cfg, out_dir / "sweep_config.txt");

    for (FilterKind kind : req.filters) {
        std::vector<PlotSeries> series;
        for (const std::string& route : req.routes) {
            PlotSeries s;
            s.label = route;
            for (const SweepCell& c : result.cells)
                if (c.filter == filter_name(kind) && c.route == route) {
                    s.x.push_back(c.m);
                    s.y.push_back(c.avg_error);
                }
            series.push_back(std::move(s));
        }
        PlotOptions opt;
        opt.title = std::string("test error vs M (") + filter_name(kind) + ")";
        opt.x_label = "M";
        opt.y_label = "avg relative error";
        opt.log_y = true;
        write_line_plot(out_dir / (std::string("sweep_") + filter_name(kind) + ".svg"), series, opt);
    }
    for (const SweepCell& c : result.cells)
        if (!c.message.empty())
            std::cerr << "cell " << c.filter << "/" << c.route << "/M=" << c.m
                      << " failed: " << c.message << "\n";
    return 0;
}

int cmd_long(const CommonOptions& common, const std::string& data, const std::string& dataset,
             const std::vector<std::string>& op_paths, std::vector<std::string> labels,
             const std::string& out, bool svg) {
    const ExperimentConfig cfg = load_effective_config(common);
    const fs::path out_dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
    fs::create_directories(out_dir);
    const LoadedSet set = load_snapshot_set(fs::path(data), dataset, false);

    if (labels.empty()) {
        for (const std::string& p : op_paths)
            labels.push_back(p == "baseline" ? "baseline" : fs::path(p).stem().string());
    }
    if (labels.size() != op_paths.size())
        throw ValidationError("long: --labels must match --operators in count");

    std::vector<std::pair<std::string, Matrix>> ops;
    for (size_t i = 0; i < op_paths.size(); ++i)
        ops.emplace_back(labels[i], load_operator(op_paths[i], cfg));

    const std::vector<ErrorCurve> curves = long_horizon_study(ops, set.set, cfg.solver);
    std::vector<PlotSeries> series;
    for (const ErrorCurve& curve : curves) {
        write_error_curve_csv(out_dir / ("long_" + curve.route + ".csv"), curve);
        series.push_back({curve.route, curve.times, curve.errors});
    }
    if (svg) {
        PlotOptions opt;
        opt.title = "long-horizon relative error";
        opt.log_y = true;
        write_line_plot(out_dir / "long.svg", series, opt);
    }
    return 0;
}

int cmd_gradcheck(int instances, std::uint64_t seed, bool quiet) {
    double worst_fd = 0.0;
    for (int i = 0; i < instances; ++i) {
        RandomStream rng(stream_key(seed, hash_name("gradcheck"), static_cast<std::uint64_t>(i)));
        const int m = 2 + static_cast<int>(rng.below(7));  // M in [2, 8]
        Matrix op(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) op(r, c) = rng.normal();
        Vector u0(m), target(m);
        for (int r = 0; r < m; ++r) u0(r) = rng.normal();
        for (int r = 0; r < m; ++r) target(r) = rng.normal();
        const double t = 0.5 + rng.uniform();
        const int n_steps = 8 + static_cast<int>(rng.below(25));

        const auto lg = adjoint::gradient(op, u0, t, n_steps, target);
        Matrix fd(m, m);
        const double h = 1e-6;
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                Matrix plus = op, minus = op;
                plus(r, c) += h;
                minus(r, c) -= h;
                const double lp = (adjoint::forward(plus, u0, t, n_steps).state - target).squaredNorm();
                const double lm = (adjoint::forward(minus, u0, t, n_steps).state - target).squaredNorm();
                fd(r, c) = (lp - lm) / (2.0 * h);
            }
        }
        const double rel = (lg.grad - fd).norm() / std::max(fd.norm(), 1e-300);
        worst_fd = std::max(worst_fd, rel);
        if (!quiet)
            std::cout << "instance " << i << ": M=" << m << " rel_fd=" << format_double(rel) << "\n";
    }

    // Checkpoint-stride invariance on a fixed instance.
    RandomStream rng(stream_key(seed, hash_name("gradcheck-stride"), 0));
    const int m = 6, n_steps = 64;
    Matrix op(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) op(r, c) = rng.normal();
    Vector u0(m), target(m);
    for (int r = 0; r < m; ++r) u0(r) = rng.normal();
    for (int r = 0; r < m; ++r) target(r) = rng.normal();
    const auto g1 = adjoint::gradient(op, u0, 1.0, n_steps, target, 1);
    const auto g10 = adjoint::gradient(op, u0, 1.0, n_steps, target, 10);
    const auto gfull = adjoint::gradient(op, u0, 1.0, n_steps, target, n_steps);
    const double stride_dev =
        std::max((g1.grad - g10.grad).norm(), (g1.grad - gfull.grad).norm()) /
        std::max(g1.grad.norm(), 1e-300);

    std::cout << "max relative discrepancy vs central differences: " << format_double(worst_fd)
              << "\n";
    std::cout << "checkpoint stride deviation: " << format_double(stride_dev) << "\n";
    if (worst_fd >= 1e-5 || stride_dev >= 1e-13) {
        std::cerr << "gradcheck FAILED\n";
        return 2;
    }
    std::cout << "gradcheck OK\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coarse-grid filtered operator inference for the 1D periodic convection equation"};
    app.require_subcommand(1);

    CommonOptions common;

    auto* generate = app.add_subcommand("generate", "generate and persist DNS datasets");
    add_common(generate, common);
    std::string gen_which = "all", gen_out;
    generate->add_option("-d,--dataset", gen_which, "train, valid, test, long or all");
    generate->add_option("-o,--out", gen_out, "output directory (default: config output_dir)");

    auto* fit = app.add_subcommand("fit", "fit an operator from persisted datasets");
    add_common(fit, common);
    std::string fit_route, fit_data, fit_out, fit_train = "train", fit_valid = "valid";
    std::optional<double> fit_lambda, fit_lp, fit_ls;
    bool fit_full_grid = false;
    fit->add_option("-r,--route", fit_route, "intrusive, df or emb")->required();
    fit->add_option("-d,--data", fit_data, "dataset directory (from generate)")->required();
    fit->add_option("-o,--out", fit_out, "output directory");
    fit->add_option("--train", fit_train, "training dataset name");
    fit->add_option("--valid", fit_valid, "validation dataset name");
    fit->add_option("--lambda", fit_lambda, "pin the reconstruction ridge weight (skips the search)");
    fit->add_option("--lambda-prior", fit_lp, "pin lambda_prior (skips the search)");
    fit->add_option("--lambda-stab", fit_ls, "pin lambda_stab (skips the search)");
    fit->add_flag("--full-grid", fit_full_grid, "search the full lambda grid for the embedded route");

    auto* eval = app.add_subcommand("eval", "error curve of an operator on a dataset");
    add_common(eval, common);
    std::string eval_op, eval_data, eval_dataset = "test", eval_csv, eval_svg, eval_label;
    bool eval_logy = false;
    eval->add_option("--operator", eval_op, "operator .dfm file, or 'baseline'")->required();
    eval->add_option("-d,--data", eval_data, "dataset directory")->required();
    eval->add_option("--dataset", eval_dataset, "dataset name (default test)");
    eval->add_option("-o,--out", eval_csv, "curve CSV path");
    eval->add_option("--svg", eval_svg, "also write an SVG plot here");
    eval->add_flag("--log-y", eval_logy, "log-scale error axis in the SVG");
    eval->add_option("--label", eval_label, "route label recorded in the curve");

    auto* sweep = app.add_subcommand("sweep", "test error vs coarse resolution M, per filter and route");
    add_common(sweep, common);
    std::vector<std::string> sweep_routes = {"baseline", "intrusive", "df"};
    std::vector<std::string> sweep_filters = {"tophat", "gaussian"};
    std::string sweep_out;
    sweep->add_option("--routes", sweep_routes, "routes to sweep (baseline, intrusive, df, emb)")
        ->delimiter(',');
    sweep->add_option("--filters", sweep_filters, "filters to sweep")->delimiter(',');
    sweep->add_option("-o,--out", sweep_out, "output directory");

    auto* long_cmd = app.add_subcommand("long", "long-horizon stability study of fitted operators");
    add_common(long_cmd, common);
    std::string long_data, long_dataset = "long", long_out;
    std::vector<std::string> long_ops, long_labels;
    bool long_svg = false;
    long_cmd->add_option("-d,--data", long_data, "dataset directory")->required();
    long_cmd->add_option("--dataset", long_dataset, "dataset name (default long)");
    long_cmd->add_option("--operators", long_ops, "operator files (or 'baseline')")
        ->required()
        ->delimiter(',');
    long_cmd->add_option("--labels", long_labels, "labels, one per operator")->delimiter(',');
    long_cmd->add_option("-o,--out", long_out, "output directory");
    long_cmd->add_flag("--svg", long_svg, "also write a combined SVG plot");

    auto* gradcheck = app.add_subcommand("gradcheck", "adjoint gradient finite-difference suite");
    int gc_instances = 20;
    std::uint64_t gc_seed = 7;
    bool gc_quiet = false;
    gradcheck->add_option("--instances", gc_instances, "number of random instances");
    gradcheck->add_option("--seed", gc_seed, "random seed");
    gradcheck->add_flag("-q,--quiet", gc_quiet, "only print the summary lines");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (generate->parsed()) return cmd_generate(common, gen_which, gen_out);
        if (fit->parsed())
            return cmd_fit(common, fit_route, fit_data, fit_out, fit_train, fit_valid, fit_lambda,
                           fit_lp, fit_ls, fit_full_grid);
        if (eval->parsed())
            return cmd_eval(common, eval_op, eval_data, eval_dataset, eval_csv, eval_svg, eval_logy,
                            eval_label);
        if (sweep->parsed()) return cmd_sweep(common, sweep_routes, sweep_filters, sweep_out);
        if (long_cmd->parsed())
            return cmd_long(common, long_data, long_dataset, long_ops, long_labels, long_out, long_svg);
        if (gradcheck->parsed()) return cmd_gradcheck(gc_instances, gc_seed, gc_quiet);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
