/*
 * Copyright 2026 The lmbsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// lmbsim command-line front end: gen, run and sweep.
//
// stdout carries only machine-readable output (JSON or CSV); diagnostics go
// to stderr. Exit codes: 0 success, 1 internal error, 2 invalid input or
// configuration, 3 simulated output disagrees with the reference.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "lmbsim/config_file.hpp"
#include "lmbsim/tensor_io.hpp"

using namespace lmbsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitMismatch = 3;

struct CommonFlags {
    std::string config;
    std::vector<std::string> presets;
    std::optional<std::uint64_t> seed;
    std::optional<bool> verify;
    std::string out;
    std::string format;
    std::optional<unsigned> jobs;
};

ConfigFile load(const CommonFlags& f) {
    ConfigFile cfg = f.config.empty() ? parse_config("", "<flags>", f.presets) : load_config(f.config, f.presets);
    if (f.seed) cfg.run.seed = *f.seed;
    if (f.verify) cfg.run.verify = *f.verify;
    if (!f.out.empty()) cfg.out = f.out;
    if (!f.format.empty()) cfg.format = f.format;
    if (f.jobs) cfg.jobs = *f.jobs;
    return cfg;
}

void write_file(const std::string& path, const std::string& text, bool append = false) {
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << text;
    if (!out) throw DataError("write failed for " + path);
}

// --- gen ---------------------------------------------------------------------

struct GenFlags {
    CommonFlags common;
    std::vector<std::uint64_t> dims;
    std::optional<std::uint64_t> nnz;
    std::string distribution;
    std::string tensor_format;
};

int cmd_gen(const GenFlags& f) {
    ConfigFile cfg = load(f.common);
    GenSpec spec = cfg.run.gen.value_or(GenSpec{});
    if (!f.dims.empty()) spec.dims = {f.dims[0], f.dims[1], f.dims[2]};
    if (f.nnz) spec.nnz = *f.nnz;
    if (f.common.seed) spec.seed = *f.common.seed;
    if (!f.distribution.empty()) spec.distribution = distribution_from_string(f.distribution);
    if (cfg.out.empty()) throw ConfigError("gen needs --out");

    TensorFormat fmt = TensorFormat::Text;
    if (!f.tensor_format.empty()) {
        fmt = tensor_format_from_string(f.tensor_format);
    } else {
        const auto ext = std::filesystem::path(cfg.out).extension();
        if (ext == ".bin" || ext == ".lmbt") fmt = TensorFormat::Binary;
    }

    const CooTensor t = gen_synthetic(spec);
    store_tensor(t, cfg.out, fmt);
    std::cerr << "wrote " << t.nnz() << " nonzeros to " << cfg.out << "\n";

    std::ostringstream fp;
    fp << std::hex << std::setw(16) << std::setfill('0') << t.fingerprint();
    if (cfg.format == "csv") {
        std::cout << "path,format,I,J,K,nnz,density,seed,fingerprint\n";
        std::cout << cfg.out << ',' << to_string(fmt) << ',' << t.dim(0) << ',' << t.dim(1) << ',' << t.dim(2) << ','
                  << t.nnz() << ',' << std::setprecision(6) << t.density() << ',' << spec.seed << ',' << fp.str()
                  << "\n";
    } else {
        nlohmann::ordered_json j;
        j["path"] = cfg.out;
        j["format"] = to_string(fmt);
        j["dims"] = t.dims();
        j["nnz"] = t.nnz();
        j["density"] = t.density();
        j["seed"] = spec.seed;
        j["distribution"] = to_string(spec.distribution);
        j["fingerprint"] = fp.str();
        std::cout << j.dump(2) << "\n";
    }
    return kExitOk;
}

// --- run -----------------------------------------------------------------------

struct RunFlags {
    CommonFlags common;
    std::string tensor;
    std::string label;
};

int cmd_run(const RunFlags& f) {
    ConfigFile cfg = load(f.common);
    if (!f.tensor.empty()) {
        cfg.run.tensor_path = f.tensor;
        if (cfg.run.dataset == "custom" || dataset_preset(cfg.run.dataset)) {
            cfg.run.dataset = std::filesystem::path(f.tensor).stem().string();
        }
    }
    if (!f.label.empty()) cfg.run.label = f.label;
    cfg.run.system.validate();

    const SimResult res = simulate(cfg.run);
    const SimReport& r = res.report;
    if (cfg.format == "csv") {
        const std::string row = to_csv_row(r) + "\n";
        std::cout << report_csv_header() << "\n" << row;
        if (!cfg.out.empty()) {
            const bool fresh = !std::filesystem::exists(cfg.out) || std::filesystem::file_size(cfg.out) == 0;
            write_file(cfg.out, (fresh ? report_csv_header() + "\n" : std::string()) + row, true);
        }
    } else {
        const std::string json = to_json(r) + "\n";
        std::cout << json;
        if (!cfg.out.empty()) write_file(cfg.out, json);
    }
    if (cfg.run.verify && !r.verified) {
        std::cerr << "verification failed: max relative error " << r.max_rel_error.value_or(-1.0) << "\n";
        return kExitMismatch;
    }
    return kExitOk;
}

// --- sweep -----------------------------------------------------------------------

const MemoryMode kPlotModes[] = {MemoryMode::IpOnly, MemoryMode::CacheOnly, MemoryMode::DmaOnly, MemoryMode::Proposed};

// One row per label, one speedup column per mode ("-" where missing).
std::string wide_speedups(const SpeedupTable& t) {
    std::vector<std::string> labels;
    std::map<std::pair<std::string, std::string>, double> v;
    for (const auto& r : t.rows) {
        if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
        v[{r.label, r.mode}] = r.speedup;
    }
    std::ostringstream os;
    os << "label";
    for (auto m : kPlotModes) os << ',' << to_string(m);
    os << '\n' << std::fixed << std::setprecision(4);
    for (const auto& l : labels) {
        os << l;
        for (auto m : kPlotModes) {
            const auto it = v.find({l, std::string(to_string(m))});
            if (it == v.end()) os << ",-";
            else os << ',' << it->second;
        }
        os << '\n';
    }
    return os.str();
}

std::string gnuplot_script(const std::string& data_path, const std::string& image_path) {
    std::ostringstream os;
    os << "# Speedup over the IpOnly memory system, one cluster per row label.\n"
       << "# Render with: gnuplot " << std::filesystem::path(image_path).replace_extension(".gp").string() << "\n"
       << "set terminal pngcairo size 1000,500\n"
       << "set output '" << image_path << "'\n"
       << "set datafile separator ','\n"
       << "set datafile missing '-'\n"
       << "set style data histogram\n"
       << "set style histogram clustered gap 1\n"
       << "set style fill solid 0.8 border -1\n"
       << "set key top left\n"
       << "set ylabel 'speedup vs IpOnly'\n"
       << "set yrange [0:*]\n"
       << "set xtics rotate by -30\n"
       << "set grid ytics\n"
       << "plot for [c=2:5] '" << data_path << "' using c:xtic(1) title columnheader(c)\n";
    return os.str();
}

int cmd_sweep(const CommonFlags& f, const std::string& plot) {
    ConfigFile cfg = load(f);
    if (!plot.empty()) cfg.plot = plot;
    const auto runs = sweep_runs(cfg);
    for (const auto& r : runs) r.system.validate();
    std::cerr << "running " << runs.size() << " simulations on " << cfg.jobs << " worker(s)\n";

    const auto results = run_all(runs, std::max(1U, cfg.jobs));
    std::vector<SimReport> reports;
    bool all_verified = true;
    for (std::size_t n = 0; n < results.size(); ++n) {
        reports.push_back(results[n].report);
        if (runs[n].verify && !results[n].report.verified) {
            all_verified = false;
            std::cerr << "verification failed for " << results[n].report.label << " / " << results[n].report.mode
                      << "\n";
        }
    }
    SpeedupTable table = speedup_table(reports);
    append_geomean(table);

    const std::string csv = to_csv(table);
    const std::string json = to_json(table) + "\n";
    std::cout << (cfg.format == "csv" ? csv : json);
    if (!cfg.out.empty()) {
        write_file(cfg.out + ".csv", csv);
        write_file(cfg.out + ".json", json);
    }
    if (!cfg.plot.empty()) {
        const std::filesystem::path script(cfg.plot);
        auto data = script;
        data.replace_extension(".dat.csv");
        auto image = script;
        image.replace_extension(".png");
        write_file(data.string(), wide_speedups(table));
        write_file(script.string(), gnuplot_script(data.string(), image.string()));
        std::cerr << "plot script " << script.string() << " reads " << data.string() << "\n";
    }
    return all_verified ? kExitOk : kExitMismatch;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_jobs) {
    cmd->add_option("--config", f.config, "INI config file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", f.presets, "preset name(s); see `lmbsim presets`");
    cmd->add_option("--seed", f.seed, "seed override");
    cmd->add_flag("--verify,!--no-verify", f.verify, "compare the output against the reference MTTKRP");
    cmd->add_option("--out", f.out, "output path");
    cmd->add_option("--format", f.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
    if (with_jobs) cmd->add_option("--jobs", f.jobs, "parallel simulations")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cycle-level simulator of sparse MTTKRP memory systems"};
    app.require_subcommand(1);

    GenFlags gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic tensor file");
    add_common(gen_cmd, gen.common, false);
    gen_cmd->add_option("--dims", gen.dims, "extents I J K")->expected(3);
    gen_cmd->add_option("--nnz", gen.nnz, "number of nonzeros");
    gen_cmd->add_option("--distribution", gen.distribution, "uniform or mode-clustered");
    gen_cmd->add_option("--tensor-format", gen.tensor_format, "text or binary (default: from the extension)")
        ->check(CLI::IsMember({"text", "binary"}));

    RunFlags run;
    auto* run_cmd = app.add_subcommand("run", "simulate one MTTKRP and print its report");
    add_common(run_cmd, run.common, false);
    run_cmd->add_option("--tensor", run.tensor, "tensor file (text or binary)")->check(CLI::ExistingFile);
    run_cmd->add_option("--label", run.label, "row label");

    CommonFlags sweep;
    std::string plot;
    auto* sweep_cmd = app.add_subcommand("sweep", "run every memory mode and tabulate speedups");
    add_common(sweep_cmd, sweep, true);
    sweep_cmd->add_option("--plot", plot, "write a gnuplot script (and its data file) here");

    auto* presets_cmd = app.add_subcommand("presets", "list preset names");
    auto* show_cmd = app.add_subcommand("show-config", "print the fully expanded configuration");
    CommonFlags show;
    add_common(show_cmd, show, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (run_cmd->parsed()) return cmd_run(run);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep, plot);
        if (presets_cmd->parsed()) {
            for (const auto& n : preset_names()) std::cout << n << "\n";
            return kExitOk;
        }
        if (show_cmd->parsed()) {
            const ConfigFile cfg = load(show);
            cfg.run.system.validate();
            std::cout << to_ini(cfg.run);
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const VerificationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMismatch;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
