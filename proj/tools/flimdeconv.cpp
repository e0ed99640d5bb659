// flimdeconv: simulate, blur, corrupt, deconvolve, and measure
// frequency-domain FLIM fields from the command line.
//
// Exit codes: 0 success, 1 usage error, 2 data/processing error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "flim/flim.hpp"
#include "flim/manifest.hpp"

namespace fs = std::filesystem;
using namespace flim;

namespace {

constexpr std::size_t row_unset = std::numeric_limits<std::size_t>::max();

struct Params {
    std::size_t n = 0; // nonzero: 1D shortcut, sets width = n, height = 1
    std::size_t width = 260;
    std::size_t height = 260;
    double boundary_px = std::numeric_limits<double>::quiet_NaN(); // default: width/2
    double tau1 = 1.0;
    double tau2 = 2.0;
    double a1 = 1.0;
    double a2 = 1.0;
    double freq_mhz = 80.0;
    double pitch_nm = 300.0;
    double psf_sigma_px = 5.0;
    int psf_dims = 2;
    std::string boundary_mode = "reflect";
    std::string engine = "fft";
    std::size_t iters = 50;
    double lambda = 0.005;
    std::string noise_kind = "gaussian";
    double sigma = 0.05;
    std::uint64_t seed = 0;
    std::size_t realizations = 100;
    std::string avg_order = "field";
    double threshold = std::numeric_limits<double>::quiet_NaN(); // default: (tau1+tau2)/2
    std::string weak_side = "auto";
    std::size_t row = row_unset; // default: center row
    std::string preset;

    void resolve() {
        if (n > 0) {
            width = n;
            height = 1;
        }
        if (std::isnan(boundary_px))
            boundary_px = static_cast<double>(width) / 2.0;
        if (row == row_unset)
            row = height == 1 ? 0 : height / 2;
        if (std::isnan(threshold))
            threshold = 0.5 * (tau1 + tau2);
        if (weak_side == "auto")
            weak_side = a1 > a2 ? "right" : (a2 > a1 ? "left" : "none");
    }
};

Boundary parse_boundary(const std::string& s) {
    return s == "periodic" ? Boundary::periodic : Boundary::reflect;
}

Engine parse_engine(const std::string& s) {
    return s == "direct" ? Engine::direct : Engine::fft;
}

WeakSide parse_weak(const std::string& s) {
    if (s == "left")
        return WeakSide::left;
    if (s == "right")
        return WeakSide::right;
    return WeakSide::none;
}

PhantomSpec phantom_spec(const Params& p) {
    PhantomSpec spec;
    spec.width = p.width;
    spec.height = p.height;
    spec.boundary_px = p.boundary_px;
    spec.left = {p.tau1, p.a1};
    spec.right = {p.tau2, p.a2};
    spec.frequency_mhz = p.freq_mhz;
    spec.pixel_pitch_nm = p.pitch_nm;
    return spec;
}

NoiseSpec noise_spec(const Params& p) {
    NoiseSpec noise;
    noise.kind = p.noise_kind == "poisson" ? NoiseKind::poisson : NoiseKind::gaussian;
    noise.sigma = p.sigma;
    noise.seed = p.seed;
    noise.realizations = p.realizations;
    return noise;
}

DeconvConfig deconv_config(const Params& p) {
    DeconvConfig cfg;
    cfg.iterations = p.iters;
    cfg.lambda = p.lambda;
    cfg.boundary = parse_boundary(p.boundary_mode);
    cfg.engine = parse_engine(p.engine);
    return cfg;
}

// NaN-valued entries (defaults that were never resolved for this
// subcommand) are omitted rather than serialized as null.
Json params_json(const Params& p) {
    Json j{
        {"width", p.width},
        {"height", p.height},
        {"boundary_px", p.boundary_px},
        {"tau1_ns", p.tau1},
        {"tau2_ns", p.tau2},
        {"a1", p.a1},
        {"a2", p.a2},
        {"freq_mhz", p.freq_mhz},
        {"pitch_nm", p.pitch_nm},
        {"psf_sigma_px", p.psf_sigma_px},
        {"psf_dims", p.psf_dims},
        {"boundary_mode", p.boundary_mode},
        {"engine", p.engine},
        {"iters", p.iters},
        {"lambda", p.lambda},
        {"noise_kind", p.noise_kind},
        {"sigma", p.sigma},
        {"seed", p.seed},
        {"realizations", p.realizations},
        {"avg_order", p.avg_order},
        {"threshold_ns", p.threshold},
        {"weak_side", p.weak_side},
        {"row", p.row},
        {"preset", p.preset},
    };
    if (std::isnan(p.boundary_px))
        j.erase("boundary_px");
    if (std::isnan(p.threshold))
        j.erase("threshold_ns");
    if (p.row == row_unset)
        j.erase("row");
    return j;
}

Params params_from_json(const Json& j) {
    Params p;
    p.width = j.at("width").get<std::size_t>();
    p.height = j.at("height").get<std::size_t>();
    p.boundary_px = j.at("boundary_px").get<double>();
    p.tau1 = j.at("tau1_ns").get<double>();
    p.tau2 = j.at("tau2_ns").get<double>();
    p.a1 = j.at("a1").get<double>();
    p.a2 = j.at("a2").get<double>();
    p.freq_mhz = j.at("freq_mhz").get<double>();
    p.pitch_nm = j.at("pitch_nm").get<double>();
    p.psf_sigma_px = j.at("psf_sigma_px").get<double>();
    p.psf_dims = j.value("psf_dims", 2);
    p.boundary_mode = j.at("boundary_mode").get<std::string>();
    p.engine = j.at("engine").get<std::string>();
    p.iters = j.at("iters").get<std::size_t>();
    p.lambda = j.at("lambda").get<double>();
    p.noise_kind = j.at("noise_kind").get<std::string>();
    p.sigma = j.at("sigma").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.realizations = j.at("realizations").get<std::size_t>();
    p.avg_order = j.at("avg_order").get<std::string>();
    p.threshold = j.at("threshold_ns").get<double>();
    p.weak_side = j.at("weak_side").get<std::string>();
    p.row = j.at("row").get<std::size_t>();
    p.preset = j.value("preset", std::string{});
    return p;
}

Kernel load_kernel_file(const fs::path& path) {
    ScalarField f = read_scalar_field(path);
    return kernel_from_values(f.plane.width(), f.plane.height(),
                              std::vector<double>(f.plane.begin(), f.plane.end()));
}

Kernel make_kernel(const Params& p, const std::string& kernel_path, std::size_t field_height) {
    if (!kernel_path.empty())
        return load_kernel_file(kernel_path);
    return gaussian_kernel(p.psf_sigma_px, field_height == 1 ? 1 : 2);
}

LifetimeMap load_lifetime(const fs::path& path) {
    LoadedField f = read_field(path);
    if (auto* c = std::get_if<ComplexField>(&f))
        return extract_lifetime(*c);
    return lifetime_from_scalar_field(std::get<ScalarField>(f));
}

void write_plane_traces(const ConvergenceTrace& re, const ConvergenceTrace& im,
                        const fs::path& path) {
    std::string out = "plane,iteration,residual_l2,max_rel_change\n";
    const auto append = [&out](const char* plane, const ConvergenceTrace& t) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            out += plane;
            out += ',';
            out += std::to_string(i + 1);
            out += ',';
            out += format_number(t[i].residual_l2);
            out += ',';
            out += format_number(t[i].max_rel_change);
            out += '\n';
        }
    };
    append("re", re);
    append("im", im);
    atomic_write_file(path, out);
}

int run_simulate(Params p, const std::string& out, const std::string& truth_out) {
    p.resolve();
    Phantom ph = make_phantom(phantom_spec(p));
    write_field(out, ph.field);
    RunManifest manifest("simulate");
    manifest.set_parameters(params_json(p));
    manifest.add_output(out);
    if (!truth_out.empty()) {
        write_field(truth_out, lifetime_to_scalar_field(ph.truth));
        manifest.add_output(truth_out);
    }
    manifest.write(out + ".manifest.json");
    std::cout << "wrote " << out << " (" << p.width << "x" << p.height << ")\n";
    return 0;
}

int run_psf(const Params& p, const std::string& out) {
    Kernel k = gaussian_kernel(p.psf_sigma_px, p.psf_dims);
    ScalarField f;
    f.plane = ScalarPlane(k.width, k.height, k.values);
    f.pixel_pitch_nm = 1.0;
    f.frequency_mhz = 0.0;
    write_field(out, f);
    RunManifest manifest("psf");
    manifest.set_parameters(params_json(p));
    manifest.add_output(out);
    manifest.write(out + ".manifest.json");
    std::cout << "wrote " << out << " (" << k.width << "x" << k.height << " taps)\n";
    return 0;
}

int run_convolve(const Params& p, const std::string& in, const std::string& kernel_in,
                 const std::string& out) {
    ComplexField field = read_complex_field(in);
    Kernel k = make_kernel(p, kernel_in, field.height());
    ComplexField result = convolve(field, k, parse_boundary(p.boundary_mode),
                                   parse_engine(p.engine));
    write_field(out, result);
    RunManifest manifest("convolve");
    manifest.set_parameters(params_json(p));
    manifest.add_input(in);
    if (!kernel_in.empty())
        manifest.add_input(kernel_in);
    manifest.add_output(out);
    manifest.write(out + ".manifest.json");
    std::cout << "wrote " << out << "\n";
    return 0;
}

int run_noise(const Params& p, const std::string& in, const std::string& out) {
    ComplexField field = read_complex_field(in);
    ComplexField noisy = add_noise(field, noise_spec(p), p.seed);
    write_field(out, noisy);
    RunManifest manifest("noise");
    manifest.set_parameters(params_json(p));
    manifest.add_input(in);
    manifest.add_output(out);
    manifest.write(out + ".manifest.json");
    std::cout << "wrote " << out << "\n";
    return 0;
}

int run_deconvolve(const Params& p, const std::string& in, const std::string& kernel_in,
                   const std::string& out, const std::string& trace_out) {
    ComplexField field = clamp_nonnegative(read_complex_field(in));
    Kernel k = make_kernel(p, kernel_in, field.height());
    DeconvResult result = deconvolve_field(field, k, deconv_config(p));
    write_field(out, result.field);
    RunManifest manifest("deconvolve");
    manifest.set_parameters(params_json(p));
    manifest.add_input(in);
    if (!kernel_in.empty())
        manifest.add_input(kernel_in);
    manifest.add_output(out);
    if (!trace_out.empty()) {
        write_plane_traces(result.trace_re, result.trace_im, trace_out);
        manifest.add_output(trace_out);
    }
    manifest.write(out + ".manifest.json");
    std::cout << "wrote " << out << " after " << p.iters << " iterations\n";
    return 0;
}

int run_lifetime(const Params& p, const std::string& in, const std::string& out_base) {
    ComplexField field = read_complex_field(in);
    LifetimeMap map = extract_lifetime(field);
    const fs::path ff = out_base + ".ff";
    const fs::path csv = out_base + ".csv";
    const fs::path pgm = out_base + ".pgm";
    write_field(ff, lifetime_to_scalar_field(map));
    write_lifetime_csv(map, csv);
    write_lifetime_pgm16(map, pgm);
    RunManifest manifest("lifetime");
    manifest.set_parameters(params_json(p));
    manifest.add_input(in);
    manifest.add_output(ff);
    manifest.add_output(csv);
    manifest.add_output(pgm);
    manifest.add_output(out_base + ".pgm.range.txt");
    manifest.write(out_base + ".manifest.json");
    std::cout << "wrote " << ff << ", " << csv << ", " << pgm << "\n";
    return 0;
}

int run_profile(const Params& p, const std::string& in, const std::string& out) {
    LifetimeMap map = load_lifetime(in);
    const std::size_t row = p.row == row_unset ? (map.height() == 1 ? 0 : map.height() / 2)
                                               : p.row;
    Profile profile = extract_profile(map, row);
    write_profile_csv(profile, out);
    RunManifest manifest("profile");
    Json params = params_json(p);
    params["row"] = row;
    manifest.set_parameters(params);
    manifest.add_input(in);
    manifest.add_output(out);
    manifest.write(out + ".manifest.json");
    std::cout << "wrote " << out << " (row " << row << ")\n";
    return 0;
}

int run_metrics(Params p, const std::string& in, const std::string& truth_in,
                const std::string& out, bool have_boundary) {
    LifetimeMap estimate = load_lifetime(in);
    LifetimeMap truth = load_lifetime(truth_in);
    if (std::isnan(p.threshold))
        p.threshold = 0.5 * (p.tau1 + p.tau2);
    if (p.weak_side == "auto")
        p.weak_side = p.a1 > p.a2 ? "right" : (p.a2 > p.a1 ? "left" : "none");
    const std::size_t row = p.row == row_unset
                                ? (estimate.height() == 1 ? 0 : estimate.height() / 2)
                                : p.row;
    p.row = row;

    Mask mask = masked_defined(estimate,
                               central_region_mask(estimate.width(), estimate.height()));
    const double rmse = lifetime_rmse(estimate, truth, mask);

    Profile profile = extract_profile(estimate, row);
    BoundaryEstimate boundary = boundary_from_threshold(profile, p.threshold);

    Json doc{
        {"row", row},
        {"threshold_ns", p.threshold},
        {"rmse_central80_ns", rmse},
        {"boundary",
         Json{{"position_px", boundary.position_px}, {"position_nm", boundary.position_nm}}},
    };
    if (have_boundary) {
        doc["boundary"]["true_px"] = p.boundary_px;
        doc["boundary"]["shift_px"] =
            boundary_shift_px(boundary.position_px, p.boundary_px, parse_weak(p.weak_side));
        doc["boundary"]["weak_side"] = p.weak_side;
    }
    atomic_write_file(out, doc.dump(2) + "\n");

    RunManifest manifest("metrics");
    manifest.set_parameters(params_json(p));
    manifest.add_input(in);
    manifest.add_input(truth_in);
    manifest.add_output(out);
    manifest.write(out + ".manifest.json");
    std::cout << "rmse_central80_ns=" << format_number(rmse)
              << " boundary_px=" << format_number(boundary.position_px) << "\n";
    return 0;
}

int run_pipeline(Params p, const fs::path& outdir) {
    p.resolve();
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(outdir);

    RunManifest manifest("pipeline");
    manifest.set_parameters(params_json(p));
    std::vector<fs::path> outputs;
    const auto emit = [&outputs, &outdir](const std::string& name) {
        outputs.push_back(outdir / name);
        return outdir / name;
    };

    std::cout << "phantom " << p.width << "x" << p.height << " boundary=" << p.boundary_px
              << " a1=" << p.a1 << " a2=" << p.a2 << "\n";
    Phantom ph = make_phantom(phantom_spec(p));
    write_field(emit("ideal.ff"), ph.field);
    write_field(emit("truth.ff"), lifetime_to_scalar_field(ph.truth));

    Kernel k = gaussian_kernel(p.psf_sigma_px, p.height == 1 ? 1 : 2);
    const Boundary boundary = parse_boundary(p.boundary_mode);
    const Engine engine = parse_engine(p.engine);
    std::cout << "convolving (sigma_px=" << p.psf_sigma_px << ", " << p.boundary_mode
              << ", " << p.engine << ")\n";
    ComplexField convolved = convolve(ph.field, k, boundary, engine);
    write_field(emit("convolved.ff"), convolved);

    DeconvConfig cfg = deconv_config(p);
    LifetimeMap conv_map, deconv_map;

    if (p.sigma > 0.0) {
        NoiseSpec noise = noise_spec(p);
        std::cout << "averaging " << noise.realizations << " noisy realizations (sigma="
                  << p.sigma << ", seed=" << p.seed << ", order=" << p.avg_order << ")\n";
        Deconvolver dec(p.width, p.height, k, cfg);
        const auto identity = [](const ComplexField& f) { return clamp_nonnegative(f); };
        const auto deconv = [&dec](const ComplexField& f) {
            return dec.run(clamp_nonnegative(f)).field;
        };
        if (p.avg_order == "lifetime") {
            conv_map = average_lifetime_realizations(identity, convolved, noise);
            deconv_map = average_lifetime_realizations(deconv, convolved, noise);
        } else {
            ComplexField conv_avg = average_realizations(identity, convolved, noise);
            ComplexField deconv_avg = average_realizations(deconv, convolved, noise);
            write_field(emit("convolved_avg.ff"), conv_avg);
            write_field(emit("deconvolved_avg.ff"), deconv_avg);
            conv_map = extract_lifetime(conv_avg);
            deconv_map = extract_lifetime(deconv_avg);
        }
    } else {
        std::cout << "deconvolving (" << p.iters << " iterations, lambda=" << p.lambda
                  << ")\n";
        DeconvResult result = deconvolve_field(convolved, k, cfg);
        write_field(emit("deconvolved.ff"), result.field);
        write_plane_traces(result.trace_re, result.trace_im, emit("trace.csv"));
        conv_map = extract_lifetime(convolved);
        deconv_map = extract_lifetime(result.field);
    }

    write_field(emit("lifetime_convolved.ff"), lifetime_to_scalar_field(conv_map));
    write_field(emit("lifetime_deconvolved.ff"), lifetime_to_scalar_field(deconv_map));
    write_lifetime_csv(conv_map, emit("lifetime_convolved.csv"));
    write_lifetime_csv(deconv_map, emit("lifetime_deconvolved.csv"));
    write_lifetime_pgm16(conv_map, emit("lifetime_convolved.pgm"));
    outputs.push_back(outdir / "lifetime_convolved.pgm.range.txt");
    write_lifetime_pgm16(deconv_map, emit("lifetime_deconvolved.pgm"));
    outputs.push_back(outdir / "lifetime_deconvolved.pgm.range.txt");

    write_profile_csv(extract_profile(ph.truth, p.row), emit("profile_truth.csv"));
    write_profile_csv(extract_profile(conv_map, p.row), emit("profile_convolved.csv"));
    write_profile_csv(extract_profile(deconv_map, p.row), emit("profile_deconvolved.csv"));

    const WeakSide weak = parse_weak(p.weak_side);
    const Mask central = central_region_mask(p.width, p.height);
    const auto arm = [&](const LifetimeMap& map) {
        BoundaryEstimate est = boundary_from_threshold(extract_profile(map, p.row),
                                                       p.threshold, p.boundary_px, weak);
        const double rmse = lifetime_rmse(map, ph.truth, masked_defined(map, central));
        return Json{
            {"boundary_px", est.position_px},
            {"boundary_nm", est.position_nm},
            {"shift_px", est.shift_px},
            {"rmse_central80_ns", rmse},
        };
    };
    Json metrics{
        {"row", p.row},
        {"threshold_ns", p.threshold},
        {"true_boundary_px", p.boundary_px},
        {"weak_side", p.weak_side},
        {"convolved", arm(conv_map)},
        {"deconvolved", arm(deconv_map)},
    };
    atomic_write_file(emit("metrics.json"), metrics.dump(2) + "\n");

    for (const fs::path& path : outputs)
        manifest.add_output(path);
    manifest.write(outdir / "manifest.json");

    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    std::cout << "convolved: shift_px=" << format_number(metrics["convolved"]["shift_px"].get<double>())
              << " rmse=" << format_number(metrics["convolved"]["rmse_central80_ns"].get<double>())
              << "\ndeconvolved: shift_px="
              << format_number(metrics["deconvolved"]["shift_px"].get<double>())
              << " rmse=" << format_number(metrics["deconvolved"]["rmse_central80_ns"].get<double>())
              << "\ndone in " << format_number(dt.count()) << " s, outputs in " << outdir.string()
              << "\n";
    return 0;
}

struct PresetValues {
    bool one_d;
    std::size_t width;
    std::size_t height;
    double boundary_px;
    double a1;
    double sigma;
    std::size_t realizations;
};

const std::map<std::string, PresetValues>& preset_table() {
    static const std::map<std::string, PresetValues> table{
        {"fig1a", {true, 256, 1, 128.0, 1.0, 0.0, 1}},
        {"fig1b", {true, 256, 1, 128.0, 5.0, 0.0, 1}},
        {"fig2-equal", {false, 260, 260, 130.0, 1.0, 0.05, 100}},
        {"fig2-unequal", {false, 260, 260, 130.0, 5.0, 0.05, 100}},
    };
    return table;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency-domain FLIM phantom simulation and RL/TV deconvolution"};
    app.require_subcommand(1);

    Params p;
    std::string in_path, truth_path, kernel_path, out_path, trace_path, manifest_path;

    const auto add_phantom_opts = [&p](CLI::App* cmd) {
        cmd->add_option("--n", p.n, "1D phantom length (sets width=n, height=1)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--width", p.width, "field width in pixels")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--height", p.height, "field height in pixels")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--boundary-px", p.boundary_px,
                        "interface x coordinate (default: width/2)");
        cmd->add_option("--tau1", p.tau1, "left lifetime in ns")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--tau2", p.tau2, "right lifetime in ns")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--a1", p.a1, "left magnitude")->check(CLI::NonNegativeNumber);
        cmd->add_option("--a2", p.a2, "right magnitude")->check(CLI::NonNegativeNumber);
        cmd->add_option("--freq-mhz", p.freq_mhz, "modulation frequency in MHz")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--pitch-nm", p.pitch_nm, "pixel pitch in nm")
            ->check(CLI::PositiveNumber);
    };
    const auto add_kernel_opts = [&](CLI::App* cmd, bool with_file) {
        cmd->add_option("--psf-sigma-px", p.psf_sigma_px, "Gaussian PSF sigma in pixels")
            ->check(CLI::PositiveNumber);
        if (with_file)
            cmd->add_option("--kernel-in", kernel_path,
                            "custom kernel from a 1-plane FieldFile (overrides sigma)");
    };
    const auto add_conv_opts = [&p](CLI::App* cmd) {
        cmd->add_option("--boundary-mode", p.boundary_mode, "edge handling")
            ->check(CLI::IsMember({"reflect", "periodic"}));
        cmd->add_option("--engine", p.engine, "convolution engine")
            ->check(CLI::IsMember({"fft", "direct"}));
    };
    const auto add_deconv_opts = [&p](CLI::App* cmd) {
        cmd->add_option("--iters", p.iters, "iteration count")->check(CLI::PositiveNumber);
        cmd->add_option("--lambda", p.lambda, "TV regularization weight")
            ->check(CLI::NonNegativeNumber);
    };
    const auto add_noise_opts = [&p](CLI::App* cmd) {
        cmd->add_option("--kind", p.noise_kind, "noise model")
            ->check(CLI::IsMember({"gaussian", "poisson"}));
        cmd->add_option("--sigma", p.sigma, "noise std-dev")->check(CLI::NonNegativeNumber);
        cmd->add_option("--seed", p.seed, "base RNG seed");
        cmd->add_option("--realizations", p.realizations, "noise realizations to average")
            ->check(CLI::PositiveNumber);
    };

    int rc = 0;

    auto* simulate = app.add_subcommand("simulate", "write an ideal two-fluorophore phantom");
    add_phantom_opts(simulate);
    simulate->add_option("--out", out_path, "output FieldFile")->required();
    simulate->add_option("--truth-out", truth_path, "also write the truth lifetime map");
    simulate->callback([&] { rc = run_simulate(p, out_path, truth_path); });

    auto* psf = app.add_subcommand("psf", "write a Gaussian PSF kernel");
    add_kernel_opts(psf, false);
    psf->add_option("--dims", p.psf_dims, "kernel dimensionality")
        ->check(CLI::IsMember({1, 2}));
    psf->add_option("--out", out_path, "output FieldFile")->required();
    psf->callback([&] { rc = run_psf(p, out_path); });

    auto* convolve_cmd = app.add_subcommand("convolve", "blur a field with a PSF");
    convolve_cmd->add_option("--in", in_path, "input FieldFile")->required();
    add_kernel_opts(convolve_cmd, true);
    add_conv_opts(convolve_cmd);
    convolve_cmd->add_option("--out", out_path, "output FieldFile")->required();
    convolve_cmd->callback([&] { rc = run_convolve(p, in_path, kernel_path, out_path); });

    auto* noise_cmd = app.add_subcommand("noise", "add one noise realization to a field");
    noise_cmd->add_option("--in", in_path, "input FieldFile")->required();
    add_noise_opts(noise_cmd);
    noise_cmd->add_option("--out", out_path, "output FieldFile")->required();
    noise_cmd->callback([&] { rc = run_noise(p, in_path, out_path); });

    auto* deconvolve_cmd =
        app.add_subcommand("deconvolve", "Richardson-Lucy(-TV) deconvolve a field");
    deconvolve_cmd->add_option("--in", in_path, "measured FieldFile")->required();
    add_kernel_opts(deconvolve_cmd, true);
    add_conv_opts(deconvolve_cmd);
    add_deconv_opts(deconvolve_cmd);
    deconvolve_cmd->add_option("--out", out_path, "output FieldFile")->required();
    deconvolve_cmd->add_option("--trace-out", trace_path, "per-iteration convergence CSV");
    deconvolve_cmd->callback(
        [&] { rc = run_deconvolve(p, in_path, kernel_path, out_path, trace_path); });

    auto* lifetime_cmd = app.add_subcommand("lifetime", "extract a phase-lifetime map");
    lifetime_cmd->add_option("--in", in_path, "complex FieldFile")->required();
    lifetime_cmd->add_option("--out", out_path, "output base name (writes .ff/.csv/.pgm)")
        ->required();
    lifetime_cmd->callback([&] { rc = run_lifetime(p, in_path, out_path); });

    auto* profile_cmd = app.add_subcommand("profile", "extract a row profile as CSV");
    profile_cmd->add_option("--in", in_path, "lifetime map or complex FieldFile")->required();
    profile_cmd->add_option("--row", p.row, "row index (default: centre)");
    profile_cmd->add_option("--out", out_path, "output CSV")->required();
    profile_cmd->callback([&] { rc = run_profile(p, in_path, out_path); });

    auto* metrics_cmd =
        app.add_subcommand("metrics", "boundary position and RMSE against a truth map");
    metrics_cmd->add_option("--in", in_path, "estimate (lifetime map or complex field)")
        ->required();
    metrics_cmd->add_option("--truth", truth_path, "truth (lifetime map or complex field)")
        ->required();
    metrics_cmd->add_option("--row", p.row, "profile row (default: centre)");
    metrics_cmd->add_option("--threshold", p.threshold,
                            "lifetime threshold in ns (default: (tau1+tau2)/2)");
    metrics_cmd->add_option("--tau1", p.tau1, "left lifetime in ns");
    metrics_cmd->add_option("--tau2", p.tau2, "right lifetime in ns");
    auto* opt_truth_boundary = metrics_cmd->add_option(
        "--boundary-px", p.boundary_px, "true interface coordinate, enables shift output");
    metrics_cmd->add_option("--weak-side", p.weak_side, "side of the weaker fluorophore")
        ->check(CLI::IsMember({"auto", "none", "left", "right"}));
    metrics_cmd->add_option("--out", out_path, "output JSON")->required();
    metrics_cmd->callback([&] {
        rc = run_metrics(p, in_path, truth_path, out_path,
                         opt_truth_boundary->count() > 0);
    });

    auto* pipeline_cmd = app.add_subcommand(
        "pipeline", "simulate -> convolve -> [noise+average] -> deconvolve -> metrics");
    add_phantom_opts(pipeline_cmd);
    add_kernel_opts(pipeline_cmd, false);
    add_conv_opts(pipeline_cmd);
    add_deconv_opts(pipeline_cmd);
    add_noise_opts(pipeline_cmd);
    pipeline_cmd->add_option("--avg-order", p.avg_order,
                             "average complex fields or lifetime maps across realizations")
        ->check(CLI::IsMember({"field", "lifetime"}));
    pipeline_cmd->add_option("--row", p.row, "profile/metrics row (default: centre)");
    auto* opt_preset = pipeline_cmd
                           ->add_option("--preset", p.preset, "named scenario")
                           ->check(CLI::IsMember({"fig1a", "fig1b", "fig2-equal",
                                                  "fig2-unequal"}));
    auto* opt_from_manifest = pipeline_cmd->add_option(
        "--from-manifest", manifest_path, "re-run the parameters recorded in a manifest");
    opt_from_manifest->excludes(opt_preset);
    pipeline_cmd->add_option("--out", out_path, "output directory")->required();
    pipeline_cmd->callback([&] {
        if (!manifest_path.empty()) {
            Json doc = read_manifest(manifest_path);
            rc = run_pipeline(params_from_json(doc.at("parameters")), out_path);
            return;
        }
        if (!p.preset.empty()) {
            const PresetValues& pv = preset_table().at(p.preset);
            if (!pipeline_cmd->count("--n") && !pipeline_cmd->count("--width") &&
                !pipeline_cmd->count("--height")) {
                if (pv.one_d) {
                    p.n = pv.width;
                } else {
                    p.width = pv.width;
                    p.height = pv.height;
                }
            }
            if (!pipeline_cmd->count("--boundary-px"))
                p.boundary_px = pv.boundary_px;
            if (!pipeline_cmd->count("--a1"))
                p.a1 = pv.a1;
            if (!pipeline_cmd->count("--sigma"))
                p.sigma = pv.sigma;
            if (!pipeline_cmd->count("--realizations"))
                p.realizations = pv.realizations;
        }
        rc = run_pipeline(p, out_path);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
