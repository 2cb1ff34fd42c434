#include "fasta/cli.hpp"

#include "fasta/errors.hpp"
#include "fasta/generate.hpp"
#include "fasta/matrix_io.hpp"
#include "fasta/problems.hpp"
#include "fasta/trace_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fasta::cli {

int exit_code(Termination termination) {
    switch (termination) {
    case Termination::tolerance_reached:
    case Termination::custom_stop:
        return kExitSuccess;
    case Termination::max_iters:
        return kExitMaxIters;
    case Termination::stagnation:
        return kExitFailure;
    }
    return kExitFailure;
}

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

const char *const kSubcommands[][2] = {
    {"sls", "l1-penalized least squares  mu|x|_1 + 1/2|Ax-b|^2"},
    {"lasso", "least squares with |x|_1 <= lambda"},
    {"logistic", "l1-penalized logistic regression  mu|x|_1 + logit(Ax,b)"},
    {"matcomp", "1-bit matrix completion  mu|X|_* + logit(X,Y) on observed entries"},
    {"phaselift", "PhaseLift  mu|X|_* + |A(X)-b|^2, X PSD"},
    {"democratic", "democratic representation  mu|x|_inf + 1/2|Ax-b|^2"},
    {"tv", "total-variation denoising  mu TV(x) + 1/2|x-f|^2"},
    {"generic", "dense A with a chosen smooth loss f and regularizer g"},
};

struct Config {
    std::string subcommand;
    // data
    std::string gen;
    std::string a_path, b_path, y_path, mask_path, image_path, shape_text;
    std::string f_name = "quadratic", g_name = "l1";
    std::optional<double> mu, lambda;
    // options
    double tol = 1e-3;
    long max_iters = 1000;
    bool adaptive = false, no_adaptive = false, accelerate = false, no_restart = false, no_backtrack = false;
    std::optional<double> tau, lipschitz;
    std::string stop_rule = "hybridResidual";
    int verbose = 0;
    bool record_objective = false, record_iterates = false;
    std::string header;
    std::string out;
    std::uint64_t seed = 0;
    bool help_json = false;
};

void add_flags(CLI::App &app, Config &c) {
    app.add_option("--gen", c.gen, "Generate a seeded instance with these dimensions, e.g. 20x50");
    app.add_option("--A", c.a_path, "Matrix file (Matrix Market or CSV); rows a_i for phaselift");
    app.add_option("--b", c.b_path, "Right-hand side / label vector file");
    app.add_option("--Y", c.y_path, "Binary observation matrix file (matcomp)");
    app.add_option("--mask", c.mask_path, "0/1 observation mask file (matcomp, default: all observed)");
    app.add_option("--image", c.image_path, "Noisy image file (tv)");
    app.add_option("--shape", c.shape_text, "Image extents for tv when the file is a flat vector, e.g. 8x8x8");
    app.add_option("--f", c.f_name, "Smooth loss for generic: quadratic | logit")->capture_default_str();
    app.add_option("--g", c.g_name, "Regularizer for generic: zero | l1 | l1ball | linf")->capture_default_str();
    app.add_option("--mu", c.mu, "Regularization weight (default: per-problem convention)");
    app.add_option("--lambda", c.lambda, "l1-ball radius for lasso");

    app.add_option("--tol", c.tol, "Stopping tolerance")->capture_default_str();
    app.add_option("--max-iters", c.max_iters, "Iteration cap")->capture_default_str();
    app.add_flag("--adaptive", c.adaptive, "Adaptive stepsizes (default on unless --accelerate)");
    app.add_flag("--no-adaptive", c.no_adaptive, "Fixed stepsize");
    app.add_flag("--accelerate", c.accelerate, "FISTA acceleration");
    app.add_flag("--no-restart", c.no_restart, "Disable FISTA restart");
    app.add_flag("--no-backtrack", c.no_backtrack, "Disable backtracking line search");
    app.add_option("--tau", c.tau, "Initial stepsize");
    app.add_option("--lipschitz", c.lipschitz, "Lipschitz constant of the smooth gradient");
    app.add_option("--stop-rule", c.stop_rule, "ratioResidual | normalizedResidual | hybridResidual")
        ->capture_default_str();
    app.add_option("--verbose", c.verbose, "0, 1 or 2")->capture_default_str();
    app.add_flag("--record-objective", c.record_objective, "Record f(Ax)+g(x) every iteration");
    app.add_flag("--record-iterates", c.record_iterates, "Store every iterate in the run record");
    app.add_option("--header", c.header, "Prefix for console output");
    app.add_option("--out", c.out, "Run record path (JSON); the trace CSV is written next to it");
    app.add_option("--seed", c.seed, "Seed for generation and stepsize estimation")->capture_default_str();
    app.add_flag("--help-json", c.help_json, "Print the flag list as JSON and exit");
}

std::string help_json(const CLI::App &app) {
    nlohmann::ordered_json j;
    j["program"] = app.get_name();
    auto subs = nlohmann::ordered_json::array();
    for (const auto &s : kSubcommands)
        subs.push_back({{"name", s[0]}, {"description", s[1]}});
    j["subcommands"] = subs;
    auto flags = nlohmann::ordered_json::array();
    for (const CLI::Option *opt : app.get_options()) {
        if (opt->get_lnames().empty())
            continue;
        nlohmann::ordered_json f;
        f["name"] = "--" + opt->get_lnames().front();
        f["takes_value"] = opt->get_type_size() != 0;
        f["default"] = opt->get_default_str();
        f["description"] = opt->get_description();
        flags.push_back(f);
    }
    j["flags"] = flags;
    j["exit_codes"] = {{"tolerance_reached", kExitSuccess},
                       {"custom_stop", kExitSuccess},
                       {"max_iters", kExitMaxIters},
                       {"stagnation", kExitFailure},
                       {"divergence", kExitFailure},
                       {"usage", kExitUsage}};
    return j.dump(2);
}

Options build_options(const Config &c) {
    if (c.adaptive && c.no_adaptive)
        throw UsageError("--adaptive and --no-adaptive are mutually exclusive");
    if (c.adaptive && c.accelerate)
        throw UsageError("--adaptive and --accelerate are mutually exclusive");
    Options o;
    o.verbose = c.verbose;
    o.tol = c.tol;
    o.max_iters = c.max_iters;
    o.record_objective = c.record_objective;
    o.record_iterates = c.record_iterates;
    o.adaptive = !c.no_adaptive && !c.accelerate;
    o.accelerate = c.accelerate;
    o.restart = !c.no_restart;
    o.backtrack = !c.no_backtrack;
    o.tau = c.tau;
    o.lipschitz = c.lipschitz;
    o.stop_rule = parse_stop_rule(c.stop_rule);
    o.string_header = c.header;
    o.seed = c.seed;
    validate(o);
    return o;
}

// Loaded or generated arrays plus the digest of the bytes they came from.
struct DataSet {
    std::vector<std::pair<std::string, Matrix>> arrays;
    std::map<std::string, std::string> digests;
    std::optional<Instance> instance;

    const Matrix &at(const std::string &name) const {
        for (const auto &[n, m] : arrays)
            if (n == name)
                return m;
        throw UsageError("missing input '" + name + "'");
    }
    Vector vec(const std::string &name) const {
        const Matrix &m = at(name);
        if (m.cols() == 1)
            return m.col(0);
        if (m.rows() == 1)
            return m.row(0).transpose();
        throw UsageError("input '" + name + "' must be a vector");
    }
};

void load(DataSet &data, const std::string &name, const std::string &path, bool required) {
    if (path.empty()) {
        if (required)
            throw UsageError("missing --" + name + " (or use --gen)");
        return;
    }
    std::string bytes;
    try {
        bytes = read_file_bytes(path);
    } catch (const std::exception &e) {
        throw UsageError(e.what());
    }
    data.digests[name] = sha256_hex(bytes);
    data.arrays.emplace_back(name, parse_matrix(bytes, path));
}

fs::path sibling(const fs::path &out, const std::string &suffix) {
    fs::path p = out;
    p.replace_extension();
    p += "." + suffix + ".csv";
    return p;
}

DataSet acquire(const Config &c) {
    const bool any_file = !(c.a_path.empty() && c.b_path.empty() && c.y_path.empty() && c.mask_path.empty() &&
                            c.image_path.empty());
    if (c.gen.empty() == !any_file)
        throw UsageError(c.gen.empty() ? "no input data: pass data files or --gen DIMS"
                                       : "--gen cannot be combined with data files");
    DataSet data;
    if (!c.gen.empty()) {
        std::string kind = c.subcommand;
        if (kind == "generic" && c.f_name == "logit")
            kind = "logistic";
        Instance inst = generate(kind, parse_shape(c.gen), c.seed);
        for (const auto &[name, m] : inst.arrays) {
            const std::string bytes = format_csv(m);
            data.digests[name] = sha256_hex(bytes);
            if (!c.out.empty())
                write_file_bytes(sibling(c.out, name), bytes);
            data.arrays.emplace_back(name, m);
        }
        data.instance = std::move(inst);
        return data;
    }
    const auto &s = c.subcommand;
    if (s == "matcomp") {
        load(data, "Y", c.y_path, true);
        load(data, "mask", c.mask_path, false);
    } else if (s == "tv") {
        load(data, "image", c.image_path, true);
    } else {
        load(data, "A", c.a_path, true);
        load(data, "b", c.b_path, true);
    }
    return data;
}

double dual_linf(const Vector &v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

struct Built {
    Problem problem;
    ProblemDescriptor descriptor;
    std::optional<TotalVariationProblem> tv;
    Shape solution_shape;
};

Built build(const Config &c, const DataSet &data) {
    Built out{Problem{identity_operator(Shape{1}), {}, {}, Vector()}, {}, std::nullopt, Shape{1}};
    auto &desc = out.descriptor;
    desc.builder = c.subcommand;
    desc.data = data.digests;
    desc.settings["source"] = c.gen.empty() ? "files" : "generated";
    if (!c.gen.empty())
        desc.settings["dims"] = parse_shape(c.gen).str();
    auto positive = [](std::optional<double> v, const char *flag) {
        if (v && !(*v > 0))
            throw UsageError(std::string(flag) + " must be positive");
        return v;
    };
    positive(c.mu, "--mu");
    positive(c.lambda, "--lambda");
    if (c.lambda && c.subcommand != "lasso")
        throw UsageError("--lambda only applies to lasso");

    const auto &s = c.subcommand;
    if (s == "sls" || s == "lasso" || s == "logistic" || s == "democratic" || s == "generic") {
        const Matrix &a = data.at("A");
        const Vector b = data.vec("b");
        if (b.size() != a.rows())
            throw UsageError("b has " + std::to_string(b.size()) + " entries but A has " + std::to_string(a.rows()) +
                             " rows");
        auto op = dense_operator(a);
        Vector x0 = Vector::Zero(a.cols());
        out.solution_shape = Shape{static_cast<std::size_t>(a.cols())};
        if (s == "sls") {
            const double mu = c.mu.value_or(0.1 * dual_linf(a.transpose() * b));
            desc.parameters["mu"] = mu;
            out.problem = sparse_least_squares(op, b, mu, x0);
        } else if (s == "lasso") {
            double lambda = 0;
            if (c.lambda)
                lambda = *c.lambda;
            else if (data.instance)
                lambda = data.instance->at("x_true").lpNorm<1>();
            else
                throw UsageError("lasso with data files needs --lambda");
            desc.parameters["lambda"] = lambda;
            out.problem = lasso(op, b, lambda, x0);
        } else if (s == "logistic") {
            const double mu = c.mu.value_or(0.1 * dual_linf(a.transpose() * (0.5 - b.array()).matrix()));
            desc.parameters["mu"] = mu;
            out.problem = sparse_logistic(op, b, mu, x0);
        } else if (s == "democratic") {
            const double mu = c.mu.value_or(0.1 * (a.transpose() * b).lpNorm<1>());
            desc.parameters["mu"] = mu;
            out.problem = democratic(op, b, mu, x0);
        } else {
            desc.settings["f"] = c.f_name;
            desc.settings["g"] = c.g_name;
            SmoothFn f;
            if (c.f_name == "quadratic")
                f = quadratic_loss(b);
            else if (c.f_name == "logit")
                f = logit_loss(b);
            else
                throw UsageError("--f must be quadratic or logit");
            ProxFn g;
            if (c.g_name == "zero") {
                g = zero_prox();
            } else {
                if (!c.mu)
                    throw UsageError("generic with --g " + c.g_name + " needs --mu");
                desc.parameters["mu"] = *c.mu;
                if (c.g_name == "l1")
                    g = l1_prox(*c.mu);
                else if (c.g_name == "l1ball")
                    g = l1_ball_prox(*c.mu);
                else if (c.g_name == "linf")
                    g = linf_prox(*c.mu);
                else
                    throw UsageError("--g must be zero, l1, l1ball or linf");
            }
            out.problem = Problem{op, f, g, x0};
        }
    } else if (s == "matcomp") {
        const Matrix &y = data.at("Y");
        ObservationMask mask = ObservationMask::full(static_cast<std::size_t>(y.rows()), static_cast<std::size_t>(y.cols()));
        for (const auto &[name, m] : data.arrays)
            if (name == "mask") {
                if (m.rows() != y.rows() || m.cols() != y.cols())
                    throw UsageError("mask extents do not match Y");
                mask = ObservationMask::from_indicator(m);
            }
        double mu = 0;
        if (c.mu) {
            mu = *c.mu;
        } else {
            // Zero is optimal iff the gradient at 0 has spectral norm <= mu.
            const Matrix g0 = as_matrix(mask.weights(), y.rows(), y.cols()).cwiseProduct((0.5 - y.array()).matrix());
            Eigen::BDCSVD<Matrix> svd(g0);
            mu = 0.1 * svd.singularValues()[0];
            if (!(mu > 0))
                mu = 1.0;
        }
        desc.parameters["mu"] = mu;
        out.solution_shape = Shape{static_cast<std::size_t>(y.rows()), static_cast<std::size_t>(y.cols())};
        out.problem = logistic_matrix_completion(y, mask, mu);
    } else if (s == "phaselift") {
        RankOneMeasurements meas{data.at("A"), data.vec("b")};
        const auto n = meas.vectors.cols();
        double mu = 0;
        if (c.mu) {
            mu = *c.mu;
        } else {
            const auto op = rank_one_measurement_operator(meas.vectors);
            Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(as_matrix(op.adjoint_apply(2.0 * meas.b), n, n)),
                                                      Eigen::EigenvaluesOnly);
            mu = 0.01 * std::max(eig.eigenvalues().maxCoeff(), 1e-12);
        }
        desc.parameters["mu"] = mu;
        out.solution_shape = Shape{static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
        out.problem = phaselift(meas, mu, Matrix::Zero(n, n));
    } else if (s == "tv") {
        const Matrix &img = data.at("image");
        Shape shape = Shape{static_cast<std::size_t>(img.rows()), static_cast<std::size_t>(img.cols())};
        if (!c.shape_text.empty())
            shape = parse_shape(c.shape_text);
        else if (!c.gen.empty())
            shape = parse_shape(c.gen);
        else if (img.cols() == 1)
            shape = Shape{static_cast<std::size_t>(img.rows())};
        Vector noisy = img.cols() == 1 ? Vector(img.col(0)) : flatten(img);
        if (static_cast<std::size_t>(noisy.size()) != shape.size())
            throw UsageError("image has " + std::to_string(noisy.size()) + " values, shape " + shape.str() +
                             " needs " + std::to_string(shape.size()));
        const double mu = c.mu.value_or(0.1 * std::max(noisy.maxCoeff() - noisy.minCoeff(), 1e-12));
        desc.parameters["mu"] = mu;
        desc.settings["shape"] = shape.str();
        out.solution_shape = shape;
        out.tv = total_variation(std::move(noisy), shape, mu);
        out.problem = out.tv->dual;
    } else {
        throw UsageError("unknown subcommand '" + s + "'");
    }
    return out;
}

Matrix solution_array(const Vector &x, const Shape &shape) {
    if (shape.rank() == 2)
        return as_matrix(x, static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1]));
    return x;
}

int execute(const Config &c, std::ostream &out, std::ostream &err) {
    Options options = build_options(c);
    options.log = &out;
    DataSet data = acquire(c);
    Built built = build(c, data);

    SolveResult result;
    try {
        result = solve(built.problem, options);
    } catch (const DivergenceError &e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }

    Vector solution = built.tv ? built.tv->recover(result.solution) : result.solution;
    if (!c.out.empty()) {
        RunRecord record{snapshot(options), result.trace, result.termination, built.descriptor, c.seed};
        write_run(record, c.out);
        write_file_bytes(sibling(c.out, "solution"), format_csv(solution_array(solution, built.solution_shape)));
    }
    if (options.verbose == 0)
        out << c.header << to_string(result.termination) << " after " << result.trace.iteration_count
            << " iterations\n";
    return exit_code(result.termination);
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Forward-backward splitting solver for f(Ax) + g(x)", "fasta"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    Config config;
    add_flags(app, config);
    for (const auto &s : kSubcommands)
        app.add_subcommand(s[0], s[1]);

    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitSuccess;
    } catch (const CLI::ParseError &e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (config.help_json) {
        out << help_json(app) << '\n';
        return kExitSuccess;
    }
    if (app.get_subcommands().empty()) {
        err << "usage error: a subcommand is required (sls, lasso, logistic, matcomp, phaselift, democratic, tv, "
               "generic)\n";
        return kExitUsage;
    }
    config.subcommand = app.get_subcommands().front()->get_name();

    try {
        return execute(config, out, err);
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << '\n';
    } catch (const ConfigError &e) {
        err << "usage error: " << e.what() << '\n';
    } catch (const InputError &e) {
        err << "usage error: " << e.what() << '\n';
    } catch (const ParseError &e) {
        err << "usage error: " << e.what() << '\n';
    } catch (const DivergenceError &e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace fasta::cli
