// SPDX-License-Identifier: Apache-2.0
//
// shortpkt: calibration, sweeps, PAPR and golden-vector export.
//
// Settings are applied in order: built-in defaults, --config file, --set
// key=value pairs, then the dedicated flags of each subcommand.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shortpkt/shortpkt.hpp"

using namespace shortpkt;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::string out;
    std::string default_out;
    std::string format = "csv";
};

void add_common(CLI::App* app, Common& c, const std::string& default_out)
{
    c.default_out = default_out;
    app->add_option("--config", c.config_path, "Flat key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--set", c.sets, "Override one config key (key=value); repeatable");
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "Output path (default: output_path key, else " + default_out + ")");
}

RunConfig resolve(Common& c)
{
    RunConfig cfg;
    if (!c.config_path.empty())
        cfg = load_config(c.config_path);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed)
        cfg.seed = *c.seed;
    if (c.out.empty())
        c.out = cfg.output_path.empty() ? c.default_out : cfg.output_path;
    cfg.output_path = c.out;
    return cfg;
}

OutputStamp stamp_of(const RunConfig& cfg) { return {config_hash(cfg), kVersion}; }

void print_point(const MetricRecord& r)
{
    std::printf("n=%d snr=%.2f csi=%s trials=%llu der=%.4g far=%.4g ber=%.4g bler=%.4g\n", r.n, r.snr_db,
                r.csi_mode.c_str(), static_cast<unsigned long long>(r.trials), r.der, r.far, r.ber, r.bler);
    std::fflush(stdout);
}

void write_records(const Common& c, const std::vector<MetricRecord>& recs, const OutputStamp& st)
{
    if (c.format == "jsonl")
        write_metrics_jsonl(c.out, recs, st);
    else
        write_metrics_csv(c.out, recs, st);
    std::printf("wrote %zu records to %s\n", recs.size(), c.out.c_str());
}

SweepOptions sweep_options(const RunConfig& cfg, const Common& c)
{
    SweepOptions o;
    o.seed = cfg.seed;
    o.trials = cfg.trials;
    o.none_trials = cfg.none_trials;
    o.max_block_errors = cfg.max_block_errors;
    o.workers = c.workers;
    o.config_hash = config_hash(cfg);
    o.on_point = print_point;
    return o;
}

std::optional<double> threshold_from(const std::string& path)
{
    if (path.empty())
        return std::nullopt;
    return load_calibration(path).eta;
}

LinkSetup link_from(const RunConfig& cfg, const std::string& calibration_path)
{
    return make_link(cfg.channel(), cfg.k, cfg.preamble(), cfg.detector(), cfg.receiver, cfg.calibration(),
                     threshold_from(calibration_path));
}

void write_sidecar(const std::string& path, const Calibration& cal, const OutputStamp& st)
{
    nlohmann::ordered_json j;
    j["eta"] = cal.eta;
    j["target_far"] = cal.target_far;
    j["trials"] = cal.trials;
    j["seed"] = cal.seed;
    j["false_alarms"] = cal.false_alarms;
    j["config_hash"] = st.config_hash;
    j["version"] = st.version;
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open output file: " + path);
    f << j.dump(2) << '\n';
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Short-packet link simulator: baseline receiver sweeps, PAPR and channel vectors"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // calibrate
    Common cal_c;
    std::optional<double> far;
    std::optional<std::uint64_t> cal_trials;
    auto* cal = app.add_subcommand("calibrate", "Calibrate the detection threshold on none-windows");
    add_common(cal, cal_c, "calibration.json");
    cal->add_option("--far", far, "Target false-alarm rate");
    cal->add_option("--trials", cal_trials, "Number of none-windows");

    // sweep-der
    Common der_c;
    std::string der_system = "baseline";
    std::string der_import;
    std::string der_calib;
    std::vector<double> der_snr;
    std::optional<std::uint64_t> der_trials, der_none;
    auto* der = app.add_subcommand("sweep-der", "Detection error rate versus SNR");
    add_common(der, der_c, "der.csv");
    der->add_option("--format", der_c.format)->check(CLI::IsMember({"csv", "jsonl"}));
    der->add_option("--system", der_system)->check(CLI::IsMember({"baseline", "phyae-import"}));
    der->add_option("--import", der_import, "Message frames (JSON lines) for --system phyae-import")
        ->check(CLI::ExistingFile);
    der->add_option("--calibration", der_calib, "Threshold sidecar from 'calibrate'")->check(CLI::ExistingFile);
    der->add_option("--snr", der_snr, "SNR points in dB")->delimiter(',');
    der->add_option("--trials", der_trials);
    der->add_option("--none-trials", der_none);

    // sweep-bler
    Common bler_c;
    std::string bler_csi = "both";
    std::string bler_calib;
    std::vector<double> bler_snr;
    std::optional<std::uint64_t> bler_trials;
    auto* bler = app.add_subcommand("sweep-bler", "BER/BLER versus SNR through the full receiver");
    add_common(bler, bler_c, "bler.csv");
    bler->add_option("--format", bler_c.format)->check(CLI::IsMember({"csv", "jsonl"}));
    bler->add_option("--csi", bler_csi)->check(CLI::IsMember({"estimated", "genie", "both"}));
    bler->add_option("--calibration", bler_calib)->check(CLI::ExistingFile);
    bler->add_option("--snr", bler_snr)->delimiter(',');
    bler->add_option("--trials", bler_trials);

    // sweep-length
    Common len_c;
    std::vector<int> lengths;
    std::optional<double> len_snr;
    std::optional<std::uint64_t> len_trials;
    auto* len = app.add_subcommand("sweep-length", "BLER versus frame length at fixed SNR (k = n)");
    add_common(len, len_c, "length.csv");
    len->add_option("--format", len_c.format)->check(CLI::IsMember({"csv", "jsonl"}));
    len->add_option("--lengths", lengths)->delimiter(',');
    len->add_option("--snr", len_snr);
    len->add_option("--trials", len_trials);

    // papr
    Common papr_c;
    std::string papr_import;
    std::optional<int> oversample;
    std::optional<std::uint64_t> papr_frames;
    auto* papr = app.add_subcommand("papr", "PAPR CCDF of baseline or imported frames");
    add_common(papr, papr_c, "papr.csv");
    papr->add_option("--import", papr_import, "Message frames (JSON lines)")->check(CLI::ExistingFile);
    papr->add_option("--oversample", oversample);
    papr->add_option("--frames", papr_frames, "Baseline frames to generate when not importing");

    // golden
    Common gold_c;
    std::optional<std::uint64_t> count;
    auto* gold = app.add_subcommand("golden", "Export channel golden vectors (JSON lines)");
    add_common(gold, gold_c, "golden.jsonl");
    gold->add_option("--count", count);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cal->parsed()) {
            RunConfig cfg = resolve(cal_c);
            if (far)
                cfg.target_far = *far;
            if (cal_trials)
                cfg.calibration_trials = *cal_trials;
            cfg.validate();
            const PreambleSpec ps = cfg.preamble();
            const LdpcCode code = LdpcCode::build(cfg.k, 2 * (cfg.n - ps.length));
            const BaselineTransmitter tx(code, ps);
            const PreambleDetector det(tx.preamble(), cfg.n, cfg.detector());
            const Calibration c = calibrate_threshold(det, cfg.target_far, cfg.calibration_trials,
                                                      cfg.calibration_snr_lo, cfg.calibration_snr_hi, cfg.seed);
            write_sidecar(cal_c.out, c, stamp_of(cfg));
            std::printf("eta=%.6f target_far=%g trials=%llu false_alarms=%llu -> %s\n", c.eta, c.target_far,
                        static_cast<unsigned long long>(c.trials), static_cast<unsigned long long>(c.false_alarms),
                        cal_c.out.c_str());
        } else if (der->parsed()) {
            RunConfig cfg = resolve(der_c);
            if (!der_snr.empty())
                cfg.snr_list = der_snr;
            if (der_trials)
                cfg.trials = *der_trials;
            if (der_none)
                cfg.none_trials = *der_none;
            cfg.validate();
            const SweepOptions o = sweep_options(cfg, der_c);
            std::vector<MetricRecord> recs;
            if (der_system == "baseline") {
                recs = der_sweep(link_from(cfg, der_calib), cfg.snr_list, o);
            } else {
                if (der_import.empty())
                    throw ConfigError("--system phyae-import needs --import");
                const std::vector<Frame> frames = import_messages(der_import);
                if (frames.empty())
                    throw ConfigError("no frames in " + der_import);
                if (static_cast<int>(frames.front().symbols.size()) != cfg.n)
                    throw ConfigError("imported frames have length " + std::to_string(frames.front().symbols.size()) +
                                      " but n = " + std::to_string(cfg.n));
                LinkSetup s = link_from(cfg, "");
                s.det = PreambleDetector(mean_frame(frames), cfg.n, cfg.detector());
                const auto c = cfg.calibration();
                s.det.set_threshold(der_calib.empty()
                                        ? calibrate_threshold(s.det, c.target_far, c.trials, c.snr_lo_db,
                                                              c.snr_hi_db, c.seed)
                                              .eta
                                        : *threshold_from(der_calib));
                recs = der_sweep_frames(s, frames, cfg.snr_list, o);
            }
            write_records(der_c, recs, stamp_of(cfg));
        } else if (bler->parsed()) {
            RunConfig cfg = resolve(bler_c);
            if (!bler_snr.empty())
                cfg.snr_list = bler_snr;
            if (bler_trials)
                cfg.trials = *bler_trials;
            if (bler_csi != "both")
                set_config_value(cfg, "csi_mode", bler_csi);
            cfg.validate();
            std::vector<CsiMode> modes;
            if (bler_csi == "both")
                modes = {CsiMode::estimated, CsiMode::genie};
            else
                modes = {cfg.receiver.csi_mode};
            const auto recs = error_rate_sweep(link_from(cfg, bler_calib), cfg.snr_list, modes,
                                               sweep_options(cfg, bler_c));
            write_records(bler_c, recs, stamp_of(cfg));
        } else if (len->parsed()) {
            RunConfig cfg = resolve(len_c);
            if (!lengths.empty())
                cfg.length_list = lengths;
            if (len_snr)
                cfg.length_snr = *len_snr;
            if (len_trials)
                cfg.trials = *len_trials;
            cfg.validate();
            const auto recs = length_sweep(cfg.length_list, cfg.length_snr, cfg.channel(), cfg.detector(),
                                           cfg.receiver, cfg.calibration(), sweep_options(cfg, len_c));
            write_records(len_c, recs, stamp_of(cfg));
        } else if (papr->parsed()) {
            RunConfig cfg = resolve(papr_c);
            if (oversample)
                cfg.papr_oversample = *oversample;
            if (papr_frames)
                cfg.papr_frames = *papr_frames;
            cfg.validate();
            std::vector<Frame> frames;
            if (!papr_import.empty()) {
                frames = import_messages(papr_import);
            } else {
                const PreambleSpec ps = cfg.preamble();
                const BaselineTransmitter tx(LdpcCode::build(cfg.k, 2 * (cfg.n - ps.length)), ps);
                for (std::uint64_t i = 0; i < cfg.papr_frames; ++i) {
                    Rng rng(derive_seed(cfg.seed, kMessageStream, i));
                    frames.push_back(tx.build(rng.bits(static_cast<std::size_t>(cfg.k))));
                }
            }
            const PaprCurve curve = papr_ccdf(frames, cfg.papr_oversample);
            write_papr_csv(papr_c.out, curve, stamp_of(cfg));
            std::printf("papr: %zu frames, oversample %d, %zu grid points -> %s\n", curve.frames, curve.oversample,
                        curve.papr_db.size(), papr_c.out.c_str());
        } else if (gold->parsed()) {
            RunConfig cfg = resolve(gold_c);
            if (count)
                cfg.golden_count = *count;
            cfg.validate();
            const PreambleSpec ps = cfg.preamble();
            const BaselineTransmitter tx(LdpcCode::build(cfg.k, 2 * (cfg.n - ps.length)), ps);
            export_golden(gold_c.out, cfg.golden_count, cfg.seed, tx, cfg.channel(), stamp_of(cfg));
            std::printf("golden: %llu records -> %s\n", static_cast<unsigned long long>(cfg.golden_count),
                        gold_c.out.c_str());
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
