// hcg: trace-driven edge-cloud offloading pipeline. Every subcommand is
// deterministic given its inputs and seeds; all file outputs use canonical
// JSON (sorted keys, shortest round-trip numbers) or fixed-format CSV.

#include "hcg/baselines.hpp"
#include "hcg/discriminator.hpp"
#include "hcg/evaluator.hpp"
#include "hcg/ingest.hpp"
#include "hcg/serial.hpp"
#include "hcg/service.hpp"
#include "hcg/simulator.hpp"
#include "hcg/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop = true; }

std::string format_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::map<std::string, hcg::CaseLabel> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::map<std::string, hcg::CaseLabel> labels;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
        }
        labels[j.at("image_id").get<std::string>()] =
            hcg::case_label_from_string(j.at("label").get<std::string>());
    }
    return labels;
}

void write_labels(const std::string& path, const std::map<std::string, hcg::CaseLabel>& labels) {
    std::string out;
    for (const auto& [id, label] : labels) {
        out += hcg::canonical_dump(json{{"image_id", id}, {"label", hcg::to_string(label)}});
        out += "\n";
    }
    write_text(path, out);
}

void write_scores_csv(const std::string& path, const std::vector<hcg::DifficultyScore>& scores) {
    std::string out = "image_id,method,score\n";
    for (const hcg::DifficultyScore& s : scores) {
        out += s.image_id;
        out += ",";
        out += hcg::to_string(s.method);
        out += ",";
        out += format_sig6(s.score);
        out += "\n";
    }
    write_text(path, out);
}

std::pair<std::string, int> split_host_port(const std::string& addr) {
    auto pos = addr.rfind(':');
    if (pos == std::string::npos) throw std::runtime_error("address must be host:port, got " + addr);
    return {addr.substr(0, pos), std::stoi(addr.substr(pos + 1))};
}

// Aligned (truths, records, labels) vectors in image-id order.
struct AlignedDataset {
    std::vector<hcg::GroundTruth> truths;
    std::vector<hcg::DetectionRecord> records;
    std::vector<hcg::CaseLabel> labels;
};

AlignedDataset align(const hcg::Dataset& ds, const std::map<std::string, hcg::CaseLabel>& labels) {
    AlignedDataset out;
    for (const auto& [id, gt] : ds.truths) {
        auto rit = ds.small_traces.find(id);
        if (rit == ds.small_traces.end())
            throw std::runtime_error("image " + id + " has no small trace");
        auto lit = labels.find(id);
        if (lit == labels.end()) throw std::runtime_error("image " + id + " has no case label");
        out.truths.push_back(gt);
        out.records.push_back(rit->second);
        out.labels.push_back(lit->second);
    }
    return out;
}

std::map<std::string, std::vector<hcg::FinalDetection>> finalize_all(
    const std::map<std::string, hcg::DetectionRecord>& traces, double cutoff) {
    std::map<std::string, std::vector<hcg::FinalDetection>> out;
    for (const auto& [id, rec] : traces) out.emplace(id, hcg::finalize(rec, cutoff));
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Trace-driven edge-cloud object-detection offloading tools"};
    app.require_subcommand(1);

    // ---- synth-gen ------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth-gen", "Generate a synthetic dataset");
    std::string synth_out;
    hcg::SynthConfig synth_cfg;
    bool synth_planted = false;
    int synth_tau_n = 2;
    double synth_tau_a = 0.31;
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_cfg.seed, "RNG seed");
    synth_cmd->add_option("--images", synth_cfg.image_count, "Number of images");
    synth_cmd->add_option("--classes", synth_cfg.class_count, "Number of classes");
    synth_cmd->add_option("--big-recall", synth_cfg.big_recall, "Big-model recall on small-missed objects");
    synth_cmd->add_flag("--planted", synth_planted, "Plant the calibration optimum");
    synth_cmd->add_option("--tau-n", synth_tau_n, "Planted object-count threshold");
    synth_cmd->add_option("--tau-a", synth_tau_a, "Planted min-area-ratio threshold");
    synth_cmd->callback([&] {
        hcg::Dataset ds = synth_planted ? hcg::generate_planted(synth_cfg, synth_tau_n, synth_tau_a)
                                        : hcg::generate(synth_cfg);
        fs::create_directories(synth_out);
        fs::path base(synth_out);
        hcg::write_truths((base / "truths.jsonl").string(), ds.truths);
        hcg::write_traces((base / "small.jsonl").string(), ds.small_traces);
        hcg::write_traces((base / "big.jsonl").string(), ds.big_traces);
        hcg::Manifest m;
        m.class_names = ds.class_names;
        m.truths_path = (base / "truths.jsonl").string();
        m.small_path = (base / "small.jsonl").string();
        m.big_path = (base / "big.jsonl").string();
        hcg::write_manifest((base / "manifest.json").string(), m);
        std::cout << "wrote " << ds.truths.size() << " images to " << synth_out << "\n";
    });

    // ---- import-voc -----------------------------------------------------
    auto* voc_cmd = app.add_subcommand("import-voc", "Convert VOC XML annotations to JSONL");
    std::string voc_dir, voc_classes, voc_out;
    voc_cmd->add_option("--dir", voc_dir, "Directory of XML files")->required();
    voc_cmd->add_option("--classes", voc_classes, "Class list file, one name per line")->required();
    voc_cmd->add_option("--out", voc_out, "Output truths JSONL")->required();
    voc_cmd->callback([&] {
        std::ifstream in(voc_classes);
        if (!in) throw std::runtime_error("cannot open " + voc_classes);
        std::vector<std::string> names;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) names.push_back(line);
        }
        hcg::VocImport imported = hcg::import_voc_xml(voc_dir, names);
        hcg::write_truths(voc_out, imported.truths);
        std::cout << "imported " << imported.truths.size() << " images, skipped "
                  << imported.skipped_objects << " unknown-class objects\n";
    });

    // ---- label-cases ----------------------------------------------------
    auto* label_cmd = app.add_subcommand("label-cases", "Label images easy/difficult from the traces");
    std::string label_manifest, label_out;
    double label_cutoff = 0.5;
    label_cmd->add_option("--manifest", label_manifest, "Dataset manifest")->required();
    label_cmd->add_option("--out", label_out, "Output labels JSONL")->required();
    label_cmd->add_option("--cutoff", label_cutoff, "Final-detection score cutoff");
    label_cmd->callback([&] {
        hcg::Dataset ds = hcg::load_dataset(label_manifest);
        if (ds.big_traces.empty()) throw std::runtime_error("label-cases needs big traces");
        write_labels(label_out, hcg::label_cases(ds.small_traces, ds.big_traces, label_cutoff));
    });

    // ---- calibrate ------------------------------------------------------
    auto* cal_cmd = app.add_subcommand("calibrate", "Calibrate all three thresholds");
    std::string cal_manifest, cal_out, cal_labels, cal_report;
    cal_cmd->add_option("--manifest", cal_manifest, "Dataset manifest")->required();
    cal_cmd->add_option("--out", cal_out, "Output thresholds JSON")->required();
    cal_cmd->add_option("--labels", cal_labels, "Case labels JSONL (default: derived from traces)");
    cal_cmd->add_option("--report", cal_report, "Optional calibration metrics JSON");
    cal_cmd->callback([&] {
        hcg::Dataset ds = hcg::load_dataset(cal_manifest);
        // Label precedence: explicit flag, then the manifest's labels file,
        // then derivation from the big traces.
        std::string labels_path = cal_labels;
        if (labels_path.empty()) labels_path = hcg::load_manifest(cal_manifest).labels_path;
        std::map<std::string, hcg::CaseLabel> labels;
        if (!labels_path.empty()) {
            labels = load_labels(labels_path);
        } else {
            if (ds.big_traces.empty())
                throw std::runtime_error("calibrate needs big traces or a labels file");
            labels = hcg::label_cases(ds.small_traces, ds.big_traces);
        }
        AlignedDataset aligned = align(ds, labels);
        hcg::NoiseCalibration noise = hcg::calibrate_noise_threshold(aligned.records, aligned.truths);
        hcg::DecisionCalibration decision =
            hcg::calibrate_decision_thresholds(aligned.truths, aligned.records, aligned.labels);
        hcg::ThresholdSet t{noise.tau_s, decision.tau_n, decision.tau_a};
        hcg::save_thresholds(cal_out, t);
        json report{{"tau_s", noise.tau_s},
                    {"noise_loss", noise.loss},
                    {"tau_n", decision.tau_n},
                    {"tau_a", decision.tau_a},
                    {"accuracy", decision.accuracy},
                    {"precision", decision.precision},
                    {"recall", decision.recall},
                    {"f1", decision.f1}};
        if (!cal_report.empty()) write_text(cal_report, hcg::canonical_dump(report) + "\n");
        std::cout << hcg::canonical_dump(report) << "\n";
    });

    // ---- discriminate ---------------------------------------------------
    auto* disc_cmd = app.add_subcommand("discriminate", "Label images with the threshold discriminator");
    std::string disc_manifest, disc_thresholds, disc_out;
    disc_cmd->add_option("--manifest", disc_manifest, "Dataset manifest")->required();
    disc_cmd->add_option("--thresholds", disc_thresholds, "Thresholds JSON")->required();
    disc_cmd->add_option("--out", disc_out, "Output labels JSONL")->required();
    disc_cmd->callback([&] {
        hcg::Dataset ds = hcg::load_dataset(disc_manifest);
        hcg::ThresholdSet t = hcg::load_thresholds(disc_thresholds);
        std::map<std::string, hcg::CaseLabel> labels;
        for (const auto& [id, rec] : ds.small_traces) labels.emplace(id, hcg::discriminate(rec, t));
        write_labels(disc_out, labels);
    });

    // ---- scores ---------------------------------------------------------
    auto* scores_cmd = app.add_subcommand("scores", "Emit per-image difficulty scores as CSV");
    std::string scores_manifest, scores_method, scores_thresholds, scores_out;
    std::uint64_t scores_seed = 42;
    scores_cmd->add_option("--manifest", scores_manifest, "Dataset manifest")->required();
    scores_cmd->add_option("--method", scores_method, "random|brenner|top1|semantic")->required();
    scores_cmd->add_option("--out", scores_out, "Output CSV")->required();
    scores_cmd->add_option("--seed", scores_seed, "Seed for the random method");
    scores_cmd->add_option("--thresholds", scores_thresholds, "Thresholds JSON for the semantic method");
    scores_cmd->callback([&] {
        hcg::Dataset ds = hcg::load_dataset(scores_manifest);
        hcg::SweepOptions opts;
        opts.method = hcg::score_method_from_string(scores_method);
        opts.seed = scores_seed;
        if (opts.method == hcg::ScoreMethod::Semantic) {
            if (scores_thresholds.empty())
                throw std::runtime_error("the semantic method needs --thresholds");
            opts.thresholds = hcg::load_thresholds(scores_thresholds);
        }
        write_scores_csv(scores_out, hcg::method_scores(ds, opts));
    });

    // ---- evaluate -------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a trace against the ground truth");
    std::string eval_manifest, eval_which = "small", eval_mode = "11pt", eval_out, eval_csv;
    double eval_cutoff = 0.5;
    eval_cmd->add_option("--manifest", eval_manifest, "Dataset manifest")->required();
    eval_cmd->add_option("--which", eval_which, "small|big (default small)");
    eval_cmd->add_option("--mode", eval_mode, "11pt|allpt");
    eval_cmd->add_option("--cutoff", eval_cutoff, "Final-detection score cutoff");
    eval_cmd->add_option("--out", eval_out, "Output report JSON")->required();
    eval_cmd->add_option("--per-class-csv", eval_csv, "Optional per-class AP CSV");
    eval_cmd->callback([&] {
        if (eval_which != "small" && eval_which != "big")
            throw std::runtime_error("--which must be small or big");
        hcg::Dataset ds = hcg::load_dataset(eval_manifest);
        const auto& traces = eval_which == "big" ? ds.big_traces : ds.small_traces;
        if (traces.empty()) throw std::runtime_error("no " + eval_which + " traces in manifest");
        hcg::ApMode mode = hcg::ap_mode_from_string(eval_mode);
        hcg::MetricsReport report =
            hcg::evaluate(finalize_all(traces, eval_cutoff), ds.truths, ds.class_count(), mode);
        write_text(eval_out, hcg::canonical_dump(json{{"report", hcg::to_json(report, mode)}}) + "\n");
        if (!eval_csv.empty()) {
            std::string csv = "class_id,class_name,ap\n";
            for (const auto& [cls, ap] : report.per_class_ap) {
                csv += std::to_string(cls) + "," + ds.class_names[cls] + "," + format_sig6(ap) + "\n";
            }
            write_text(eval_csv, csv);
        }
    });

    // ---- simulate -------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Route the dataset and account costs");
    std::string sim_manifest, sim_thresholds, sim_channel, sim_method, sim_mode = "11pt", sim_out;
    double sim_cutoff = 0.5, sim_ratio = 0.5;
    std::uint64_t sim_seed = 42;
    sim_cmd->add_option("--manifest", sim_manifest, "Dataset manifest")->required();
    sim_cmd->add_option("--thresholds", sim_thresholds,
                        "Thresholds JSON (discriminator routing; also used by --method semantic)");
    auto* sim_method_opt =
        sim_cmd->add_option("--method", sim_method,
                            "Route by difficulty score instead: random|brenner|top1|semantic");
    auto* sim_ratio_opt =
        sim_cmd->add_option("--ratio", sim_ratio, "Target upload ratio for --method routing");
    sim_cmd->add_option("--seed", sim_seed, "Seed for --method random");
    sim_cmd->add_option("--channel", sim_channel, "Channel model JSON")->required();
    sim_cmd->add_option("--mode", sim_mode, "11pt|allpt");
    sim_cmd->add_option("--cutoff", sim_cutoff, "Final-detection score cutoff");
    sim_cmd->add_option("--out", sim_out, "Output report JSON")->required();
    sim_cmd->callback([&] {
        hcg::Dataset ds = hcg::load_dataset(sim_manifest);
        hcg::ChannelModel channel = hcg::load_channel(sim_channel);
        hcg::ApMode mode = hcg::ap_mode_from_string(sim_mode);

        std::vector<hcg::RouteDecision> decisions;
        if (*sim_method_opt) {
            hcg::SweepOptions opts;
            opts.method = hcg::score_method_from_string(sim_method);
            opts.seed = sim_seed;
            if (opts.method == hcg::ScoreMethod::Semantic) {
                if (sim_thresholds.empty())
                    throw std::runtime_error("--method semantic needs --thresholds");
                opts.thresholds = hcg::load_thresholds(sim_thresholds);
            }
            decisions = hcg::route_by_score(hcg::method_scores(ds, opts), sim_ratio);
        } else {
            if (sim_thresholds.empty())
                throw std::runtime_error("simulate needs --thresholds or --method with --ratio");
            if (*sim_ratio_opt)
                throw std::runtime_error("--ratio only applies together with --method");
            decisions = hcg::route_semantic(ds, hcg::load_thresholds(sim_thresholds));
        }
        hcg::SimResult sim = hcg::simulate(ds, decisions, channel, sim_cutoff, mode);
        json j{{"report", hcg::to_json(sim.report, mode)},
               {"total_time_s", sim.total_time_s},
               {"uploaded_bytes", sim.uploaded_bytes}};
        write_text(sim_out, hcg::canonical_dump(j) + "\n");
    });

    // ---- sweep ----------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a method across upload ratios");
    std::string sweep_manifest, sweep_method, sweep_thresholds, sweep_channel, sweep_mode = "11pt",
                                                                               sweep_out;
    std::string sweep_ratios = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
    std::uint64_t sweep_seed = 42;
    double sweep_cutoff = 0.5;
    sweep_cmd->add_option("--manifest", sweep_manifest, "Dataset manifest")->required();
    sweep_cmd->add_option("--method", sweep_method, "random|brenner|top1|semantic")->required();
    sweep_cmd->add_option("--channel", sweep_channel, "Channel model JSON")->required();
    sweep_cmd->add_option("--ratios", sweep_ratios, "Comma-separated ascending ratios");
    sweep_cmd->add_option("--thresholds", sweep_thresholds, "Thresholds JSON (semantic method)");
    sweep_cmd->add_option("--seed", sweep_seed, "Seed (random method)");
    sweep_cmd->add_option("--mode", sweep_mode, "11pt|allpt");
    sweep_cmd->add_option("--cutoff", sweep_cutoff, "Final-detection score cutoff");
    sweep_cmd->add_option("--out", sweep_out, "Output CSV")->required();
    sweep_cmd->callback([&] {
        hcg::Dataset ds = hcg::load_dataset(sweep_manifest);
        hcg::SweepOptions opts;
        opts.method = hcg::score_method_from_string(sweep_method);
        opts.seed = sweep_seed;
        opts.cutoff = sweep_cutoff;
        opts.mode = hcg::ap_mode_from_string(sweep_mode);
        if (opts.method == hcg::ScoreMethod::Semantic) {
            if (sweep_thresholds.empty())
                throw std::runtime_error("the semantic method needs --thresholds");
            opts.thresholds = hcg::load_thresholds(sweep_thresholds);
        }
        std::vector<double> ratios;
        std::stringstream ss(sweep_ratios);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) ratios.push_back(std::stod(item));
        }
        hcg::ChannelModel channel = hcg::load_channel(sweep_channel);
        std::vector<hcg::SweepPoint> points = hcg::sweep(ds, opts, channel, ratios);
        std::string csv = "target_ratio,achieved_ratio,map,detected_objects,total_time_s,uploaded_bytes\n";
        for (const hcg::SweepPoint& p : points) {
            csv += format_sig6(p.target_ratio) + "," + format_sig6(p.achieved_ratio) + "," +
                   format_sig6(p.map_value) + "," + std::to_string(p.detected_objects) + "," +
                   format_sig6(p.total_time_s) + "," + std::to_string(p.uploaded_bytes) + "\n";
        }
        write_text(sweep_out, csv);
    });

    // ---- serve-cloud ----------------------------------------------------
    auto* serve_cmd = app.add_subcommand("serve-cloud", "Serve big-model results over TCP");
    std::string serve_manifest, serve_bind = "127.0.0.1:7901";
    double serve_cutoff = 0.5;
    serve_cmd->add_option("--manifest", serve_manifest, "Dataset manifest")->required();
    serve_cmd->add_option("--bind", serve_bind, "host:port (port 0 picks one)");
    serve_cmd->add_option("--cutoff", serve_cutoff, "Final-detection score cutoff");
    serve_cmd->callback([&] {
        hcg::Dataset ds = hcg::load_dataset(serve_manifest);
        if (ds.big_traces.empty()) throw std::runtime_error("serve-cloud needs big traces");
        auto [host, port] = split_host_port(serve_bind);
        hcg::CloudServer server(ds.big_traces, serve_cutoff);
        server.start(host, port);
        std::cout << "listening on " << server.port() << std::endl;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    });

    // ---- run-edge -------------------------------------------------------
    auto* edge_cmd = app.add_subcommand("run-edge", "Run the edge agent against a cloud server");
    std::string edge_manifest, edge_thresholds, edge_connect, edge_mode = "11pt", edge_out;
    long long edge_padding = 0;
    bool edge_offline = false;
    double edge_cutoff = 0.5;
    edge_cmd->add_option("--manifest", edge_manifest, "Dataset manifest")->required();
    edge_cmd->add_option("--thresholds", edge_thresholds, "Thresholds JSON")->required();
    edge_cmd->add_option("--connect", edge_connect, "Cloud host:port");
    edge_cmd->add_option("--padding-bytes", edge_padding, "Zero padding per upload");
    edge_cmd->add_flag("--offline", edge_offline, "Fall back to small results instead of uploading");
    edge_cmd->add_option("--mode", edge_mode, "11pt|allpt");
    edge_cmd->add_option("--cutoff", edge_cutoff, "Final-detection score cutoff");
    edge_cmd->add_option("--out", edge_out, "Output report JSON")->required();
    edge_cmd->callback([&] {
        hcg::Dataset ds = hcg::load_dataset(edge_manifest);
        hcg::EdgeOptions opts;
        opts.offline = edge_offline;
        if (!edge_offline) {
            if (edge_connect.empty()) throw std::runtime_error("run-edge needs --connect or --offline");
            std::tie(opts.cloud_host, opts.cloud_port) = split_host_port(edge_connect);
        }
        opts.padding_bytes = edge_padding;
        opts.cutoff = edge_cutoff;
        opts.mode = hcg::ap_mode_from_string(edge_mode);
        hcg::EdgeResult result = hcg::run_edge(ds, hcg::load_thresholds(edge_thresholds), opts);
        json j{{"report", hcg::to_json(result.report, opts.mode)},
               {"frames_sent", result.frames_sent},
               {"wire_bytes", result.wire_bytes},
               {"uploaded_bytes", result.uploaded_bytes},
               {"offline_fallbacks", result.offline_fallbacks}};
        write_text(edge_out, hcg::canonical_dump(j) + "\n");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
