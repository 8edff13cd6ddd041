// bma: calibrate, simulate, estimate and evaluate ballooning membrane actuators.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bma/bma.hpp"

namespace {

using namespace bma;

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_io = 2;

struct Options {
    std::string config_path;
    std::string input;
    std::vector<std::string> inputs;
    std::string out;
    std::size_t degree = 7;
    std::uint64_t seed = 0;
    std::size_t inner_iterations = 0; // 0 keeps the config value
    std::vector<double> window;
    bool json = false;
    double volume_ml = 0.0;
    std::optional<double> indent_mm;
    std::size_t points = 200;
};

std::string fmt(double v, const char* f = "%.9g") {
    if (!std::isfinite(v))
        return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string require_config_path(const Options& o) {
    const auto path = config::resolve_path(o.config_path);
    if (!path)
        throw IoError("no config given; pass --config or set BMA_CONFIG");
    return *path;
}

estimator::EstimatorConfig load_estimator(const Options& o) {
    auto cfg = config::load(require_config_path(o)).estimator_config();
    if (o.inner_iterations > 0)
        cfg.inner_iterations = o.inner_iterations;
    return cfg;
}

// Writes to --out when given, stdout otherwise.
template <class Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    write(out);
    if (!out)
        throw IoError("write to '" + path + "' failed");
}

std::vector<estimator::Sample> to_samples(const std::vector<trace::TraceRecord>& records) {
    std::vector<estimator::Sample> s;
    s.reserve(records.size());
    for (const auto& r : records)
        s.push_back({r.t, r.v_fluid, r.p});
    return s;
}

int cmd_calibrate(const Options& o) {
    const auto path = config::resolve_path(o.config_path);
    if (!path)
        throw IoError("no config given; pass --config or set BMA_CONFIG");
    config::Config c = std::filesystem::exists(*path) ? config::load(*path) : config::default_config();
    const auto samples = trace::read_calibration(o.input);
    calibration::FitOptions opt;
    opt.degree = o.degree;
    c.fit = calibration::fit_height_poly(samples, opt);
    config::save(*path, c);
    const auto points = calibration::pair_hysteresis(samples, opt.pair_tolerance);
    std::cerr << "fitted degree " << o.degree << " over " << points.size() << " mean points, rms residual "
              << fmt(units::to_mm(calibration::fit_residual(*c.fit, points)), "%.4g") << " mm -> " << *path << '\n';
    return exit_ok;
}

int cmd_estimate(const Options& o) {
    const auto cfg = load_estimator(o);
    const auto records = trace::read_trace(o.input);
    const auto est = estimator::run(to_samples(records), cfg);
    emit(o.out, [&](std::ostream& out) {
        out << "t_s,volume_ml,pressure_pa,h1_mm,h2_mm,h3_mm,h4_mm,force_n,p_hat_pa,lambda,flags\n";
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            const auto& e = est[i];
            out << fmt(r.t) << ',' << fmt(units::to_ml(r.v_fluid)) << ',' << fmt(r.p) << ','
                << fmt(units::to_mm(e.h1)) << ',' << fmt(units::to_mm(e.h2)) << ',' << fmt(units::to_mm(e.h3)) << ','
                << fmt(units::to_mm(e.h4)) << ',' << fmt(e.F) << ',' << fmt(e.p_hat) << ',' << fmt(e.lambda) << ','
                << e.flags.str() << '\n';
        }
    });
    return exit_ok;
}

int cmd_simulate(const Options& o) {
    const auto cfg = load_estimator(o);
    const auto script = simulator::load_script(o.input);
    const auto records = simulator::simulate_trace(script, cfg, o.seed);
    emit(o.out, [&](std::ostream& out) { trace::write_trace(out, records); });
    return exit_ok;
}

int cmd_predict(const Options& o) {
    const auto cfg = load_estimator(o);
    const auto records = trace::read_trace(o.input);
    emit(o.out, [&](std::ostream& out) {
        out << "t_s,volume_ml,pressure_pa,p_hat_pa\n";
        for (const auto& r : records) {
            double p_hat = std::numeric_limits<double>::quiet_NaN();
            if (r.v_fluid >= cfg.v_min_model)
                p_hat = estimator::predict_pressure(r.v_fluid, cfg);
            out << fmt(r.t) << ',' << fmt(units::to_ml(r.v_fluid)) << ',' << fmt(r.p) << ',' << fmt(p_hat) << '\n';
        }
    });
    return exit_ok;
}

int cmd_eval(const Options& o) {
    const auto cfg = load_estimator(o);
    std::optional<evaluation::TimeWindow> window;
    if (!o.window.empty()) {
        if (o.window.size() != 2 || !(o.window[0] <= o.window[1]))
            throw InvalidArgument("--window expects t0,t1 with t0 <= t1");
        window = evaluation::TimeWindow{o.window[0], o.window[1]};
    }
    // Traces are independent; one task per file.
    std::vector<std::future<evaluation::Report>> jobs;
    for (const auto& path : o.inputs)
        jobs.push_back(std::async(std::launch::async, [&cfg, window, path] {
            return evaluation::evaluate(trace::read_trace(path), cfg, window);
        }));
    std::vector<evaluation::Report> reports;
    for (auto& j : jobs)
        reports.push_back(j.get());

    emit(o.out, [&](std::ostream& out) {
        if (o.json) {
            nlohmann::json arr = nlohmann::json::array();
            for (std::size_t i = 0; i < reports.size(); ++i) {
                auto j = evaluation::to_json(reports[i]);
                j["trace"] = o.inputs[i];
                arr.push_back(j);
            }
            out << (arr.size() == 1 ? arr[0] : arr).dump(2) << '\n';
            return;
        }
        for (std::size_t i = 0; i < reports.size(); ++i)
            out << "trace: " << o.inputs[i] << '\n' << evaluation::to_text(reports[i]);
    });
    return exit_ok;
}

int cmd_export_shape(const Options& o) {
    const auto cfg = load_estimator(o);
    if (o.out.empty())
        throw InvalidArgument("export-shape needs --out <file.svg|file.csv>");
    const double v_fluid = units::ml(o.volume_ml);
    estimator::require_modeled_volume(v_fluid, cfg);
    const double h1 = calibration::evaluate_height(cfg.fit, v_fluid);
    const double v_bma = geometry::actuator_volume(v_fluid, cfg.ring);
    const auto shape = geometry::reconstruct_unindented(v_bma, h1, cfg.ring);
    const auto base = geometry::profile_polyline(shape, cfg.ring, o.points);

    shape_export::Scene scene;
    scene.ring_radius = cfg.ring.radius();
    scene.sphere = shape_export::sphere_profile(geometry::sphere_baseline(v_bma, cfg.ring), cfg.ring, o.points);
    scene.membrane = base;
    if (o.indent_mm) {
        const double d = units::mm(*o.indent_mm);
        if (!(d >= 0.0) || !(d < h1))
            throw InvalidArgument("--indent-mm must lie in [0, h1)");
        const auto deformed = geometry::reconstruct_deformed(shape, d, cfg.ring);
        scene.membrane = geometry::profile_polyline(deformed, cfg.ring, o.points);
        scene.unindented = base;
        if (deformed.k > 0.0) {
            scene.contact_z = scene.membrane[scene.membrane.size() / 2].z;
            scene.contact_half_width = deformed.k;
        } else {
            scene.contact_z = deformed.h3;
        }
    }

    const auto ext = std::filesystem::path(o.out).extension().string();
    emit(o.out, [&](std::ostream& out) {
        if (ext == ".svg")
            shape_export::write_svg(out, scene);
        else
            shape_export::write_csv(out, scene.membrane);
    });
    if (ext != ".svg" && ext != ".csv")
        std::cerr << "note: unrecognised extension '" << ext << "', wrote CSV\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ballooning membrane actuator modeling and intrinsic state estimation"};
    app.require_subcommand(1);
    Options o;

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "Config file (defaults to $BMA_CONFIG)");
    };
    auto add_inner = [&](CLI::App* sub) {
        sub->add_option("--inner-iterations", o.inner_iterations,
                        "Accelerated indentation iterations per sample (overrides config)")
            ->check(CLI::PositiveNumber);
    };

    auto* calibrate = app.add_subcommand("calibrate", "Fit the volume-to-height polynomial into the config");
    calibrate->add_option("csv", o.input, "Calibration CSV (volume_ml,height_mm,phase)")->required();
    calibrate->add_option("--degree", o.degree, "Polynomial degree")->check(CLI::PositiveNumber);
    add_config(calibrate);

    auto* estimate = app.add_subcommand("estimate", "Run the state estimator over a trace");
    estimate->add_option("trace", o.input, "Trace CSV")->required();
    estimate->add_option("--out", o.out, "Output CSV (stdout when omitted)");
    add_config(estimate);
    add_inner(estimate);

    auto* simulate = app.add_subcommand("simulate", "Synthesize a ground-truth trace from a script");
    simulate->add_option("script", o.input, "Script JSON")->required();
    simulate->add_option("--seed", o.seed, "Noise seed");
    simulate->add_option("--out", o.out, "Output trace CSV (stdout when omitted)");
    add_config(simulate);

    auto* predict = app.add_subcommand("predict-pressure", "No-contact pressure prediction for a trace");
    predict->add_option("trace", o.input, "Trace CSV")->required();
    predict->add_option("--out", o.out, "Output CSV (stdout when omitted)");
    add_config(predict);

    auto* eval = app.add_subcommand("eval", "Score the estimator against ground-truth traces");
    eval->add_option("trace", o.inputs, "Trace CSV(s) with force_n,indent_mm")->required();
    eval->add_option("--window", o.window, "Contact window t0,t1 [s]")->delimiter(',')->expected(2);
    eval->add_flag("--json", o.json, "Emit JSON");
    eval->add_option("--out", o.out, "Report file (stdout when omitted)");
    add_config(eval);
    add_inner(eval);

    auto* shape = app.add_subcommand("export-shape", "Export the reconstructed cross-section");
    shape->add_option("--volume-ml", o.volume_ml, "Injected volume [ml]")->required();
    shape->add_option("--indent-mm", o.indent_mm, "Indentation depth [mm]");
    shape->add_option("--points", o.points, "Samples per profile")->check(CLI::Range(3, 100000));
    shape->add_option("--out", o.out, "Output .svg or .csv")->required();
    add_config(shape);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_validation;
    }

    try {
        if (*calibrate)
            return cmd_calibrate(o);
        if (*estimate)
            return cmd_estimate(o);
        if (*simulate)
            return cmd_simulate(o);
        if (*predict)
            return cmd_predict(o);
        if (*eval)
            return cmd_eval(o);
        if (*shape)
            return cmd_export_shape(o);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    }
    return exit_validation;
}
