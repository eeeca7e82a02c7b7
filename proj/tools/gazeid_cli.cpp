// gazeid command-line front end.
//
// Exit codes: 0 ok, 1 I/O or input error, 2 bad spec / config / usage,
// 3 enrollment failure, 4 identity mismatch.

#include "gazeid/gazeid.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gazeid;

namespace {

enum Exit { kOk = 0, kIo = 1, kBadSpec = 2, kEnrollment = 3, kMismatch = 4 };

// Options shared by the pipeline commands. Each flag is bound to a field of
// `flags` so --help shows its default; after parsing, only the flags the
// user actually gave are copied over the config file's values.
struct ConfigOptions {
    PipelineConfig flags;
    std::string stimulus = "SYNTH";
    std::string config_path;
    std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> overrides;

    template <typename T, typename Get>
    void bind(CLI::App* app, const std::string& name, Get get, const std::string& help) {
        T& field = get(flags);
        auto* opt = app->add_option(name, field, help)->capture_default_str();
        overrides.emplace_back(opt, [this, get](PipelineConfig& cfg) { get(cfg) = get(flags); });
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        for (const auto& [opt, apply] : overrides) {
            if (opt->count() > 0) apply(cfg);
        }
        validate(cfg);
        return cfg;
    }
};

void add_config_file(CLI::App* app, ConfigOptions& o) {
    app->add_option("--config", o.config_path, "INI configuration file; flags override its values")
        ->check(CLI::ExistingFile);
}

void add_signal_options(CLI::App* app, ConfigOptions& o) {
    add_config_file(app, o);
    o.bind<double>(app, "--distance-mm", [](PipelineConfig& c) -> double& { return c.geometry.distance_mm; },
                   "Eye to screen distance (mm)");
    o.bind<double>(app, "--width-mm", [](PipelineConfig& c) -> double& { return c.geometry.width_mm; },
                   "Screen width (mm)");
    o.bind<double>(app, "--height-mm", [](PipelineConfig& c) -> double& { return c.geometry.height_mm; },
                   "Screen height (mm)");
    o.bind<double>(app, "--width-px", [](PipelineConfig& c) -> double& { return c.geometry.width_px; },
                   "Screen width (pixels)");
    o.bind<double>(app, "--height-px", [](PipelineConfig& c) -> double& { return c.geometry.height_px; },
                   "Screen height (pixels)");
    o.bind<int>(app, "--poly-order", [](PipelineConfig& c) -> int& { return c.sg.poly_order; },
                "Savitzky-Golay polynomial order");
    o.bind<int>(app, "--frame-len", [](PipelineConfig& c) -> int& { return c.sg.frame_len; },
                "Savitzky-Golay frame length (odd)");
    o.bind<double>(app, "--velocity-threshold",
                   [](PipelineConfig& c) -> double& { return c.ivt.velocity_threshold_dps; },
                   "I-VT velocity threshold (deg/s)");
    o.bind<double>(app, "--min-fixation-ms", [](PipelineConfig& c) -> double& { return c.ivt.min_fixation_ms; },
                   "Minimum fixation duration (ms)");
    o.bind<double>(app, "--min-saccade-ms", [](PipelineConfig& c) -> double& { return c.ivt.min_saccade_ms; },
                   "Saccades shorter than this merge into fixations (ms)");
    auto* opt = app->add_option("--stimulus", o.stimulus, "Stimulus kind")
                    ->check(CLI::IsMember({"RAN", "TEX", "SYNTH"}))
                    ->capture_default_str();
    o.overrides.emplace_back(opt, [&o](PipelineConfig& c) { c.stimulus = parse_stimulus_kind(o.stimulus); });
}

void add_model_options(CLI::App* app, ConfigOptions& o) {
    o.bind<int>(app, "--clusters", [](PipelineConfig& c) -> int& { return c.model.clusters; },
                "Prototypes per subject and channel");
    o.bind<int>(app, "--max-iter", [](PipelineConfig& c) -> int& { return c.model.max_iter; },
                "k-means iteration cap");
    o.bind<double>(app, "--lambda", [](PipelineConfig& c) -> double& { return c.model.lambda; },
                   "Fixation weight in score fusion");
    o.bind<int>(app, "--rounds", [](PipelineConfig& c) -> int& { return c.model.selection_rounds; },
                "Feature selection rounds");
    o.bind<double>(app, "--sigma-floor", [](PipelineConfig& c) -> double& { return c.model.sigma_floor; },
                   "Minimum prototype radius");
    o.bind<double>(app, "--pinv-tolerance", [](PipelineConfig& c) -> double& { return c.model.pinv_tolerance; },
                   "Relative pseudoinverse cutoff");
    o.bind<std::uint64_t>(app, "--seed", [](PipelineConfig& c) -> std::uint64_t& { return c.model.seed; },
                          "Training seed");
    o.bind<std::string>(app, "--mask", [](PipelineConfig& c) -> std::string& { return c.mask; },
                        "Feature mask: all, published, or a mask file");
}

std::vector<GazeRecording> load_dir(const fs::path& dir, const std::string& session, const PipelineConfig& cfg) {
    const auto paths = list_recordings(dir, session.empty() ? std::nullopt : std::optional(session));
    if (paths.empty()) throw Error("no recordings in " + dir.string() + (session.empty() ? "" : " for session " + session));
    return load_recordings(paths, cfg);
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

RbfModel read_model(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_model(text);
}

template <typename F>
int guarded(F&& body) {
    try {
        body();
        return kOk;
    } catch (const InvalidSpec& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadSpec;
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadSpec;
    } catch (const InsufficientEnrollmentData& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kEnrollment;
    } catch (const EmptyTrainingSet& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kEnrollment;
    } catch (const InsufficientSubjects& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kEnrollment;
    } catch (const IdentityMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kMismatch;
    } catch (const NonSquareMatrix& e) {
        std::cerr << "error: one-to-one matching: " << e.what() << '\n';
        return kMismatch;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eye-movement biometric identification"};
    app.require_subcommand(1);
    int status = kOk;

    // synth
    SynthSpec spec;
    std::string synth_out = "synth_data";
    std::string synth_stimulus = "SYNTH";
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with a truth.csv event log");
    synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
    synth->add_option("--subjects", spec.n_subjects, "Number of subjects")->capture_default_str();
    synth->add_option("--sessions", spec.sessions_per_subject, "Sessions per subject")->capture_default_str();
    synth->add_option("--duration", spec.duration_s, "Recording length (s)")->capture_default_str();
    synth->add_option("--rate", spec.rate_hz, "Sampling rate (Hz): 250 or 1000")->capture_default_str();
    synth->add_option("--seed", spec.master_seed, "Master seed")->capture_default_str();
    synth->add_option("--stimulus", synth_stimulus, "Stimulus kind")
        ->check(CLI::IsMember({"RAN", "TEX", "SYNTH"}))
        ->capture_default_str();
    synth->callback([&] {
        status = guarded([&] {
            spec.stimulus_kind = parse_stimulus_kind(synth_stimulus);
            const auto ds = generate(spec);
            write_dataset(synth_out, ds);
            std::cout << "wrote " << ds.recordings.size() << " recordings and truth.csv to " << synth_out << '\n';
        });
    });

    // ingest-check
    ConfigOptions ingest_opts;
    std::vector<std::string> ingest_files;
    auto* ingest = app.add_subcommand("ingest-check", "Validate recording files and print a summary");
    ingest->add_option("files", ingest_files, "Recording CSV files")->required();
    add_signal_options(ingest, ingest_opts);
    ingest->callback([&] {
        status = guarded([&] {
            const auto cfg = ingest_opts.resolve();
            for (const auto& f : ingest_files) {
                LoadOptions lo;
                lo.stimulus_kind = cfg.stimulus;
                const auto rec = load_recording(f, cfg.geometry, lo);
                std::size_t valid = 0;
                for (const auto& s : rec.samples) valid += s.valid ? 1 : 0;
                std::cout << f << ": subject " << rec.subject_id << " session " << rec.session_id << ", "
                          << rec.size() << " samples at " << rec.rate_hz << " Hz, " << valid << " valid\n";
            }
        });
    });

    // segment
    ConfigOptions seg_opts;
    std::string seg_in, seg_out;
    auto* seg = app.add_subcommand("segment", "Classify one recording into fixations and saccades");
    seg->add_option("recording", seg_in, "Recording CSV")->required();
    seg->add_option("--out", seg_out, "Segment CSV (default: stdout)");
    add_signal_options(seg, seg_opts);
    seg->callback([&] {
        status = guarded([&] {
            const auto cfg = seg_opts.resolve();
            LoadOptions lo;
            lo.stimulus_kind = cfg.stimulus;
            const auto rec = load_recording(seg_in, cfg.geometry, lo);
            const auto a = analyze(rec, cfg);
            if (seg_out.empty()) {
                write_segments_csv(std::cout, a.segments);
            } else {
                auto out = open_out(seg_out);
                write_segments_csv(out, a.segments);
            }
        });
    });

    // features
    ConfigOptions feat_opts;
    std::string feat_data, feat_session, feat_out = "features";
    auto* feat = app.add_subcommand("features", "Export per-segment feature matrices");
    feat->add_option("--data", feat_data, "Dataset directory")->required();
    feat->add_option("--session", feat_session, "Only this session (default: all)");
    feat->add_option("--out", feat_out, "Output directory for fixations.csv and saccades.csv")->capture_default_str();
    add_signal_options(feat, feat_opts);
    feat->callback([&] {
        status = guarded([&] {
            const auto cfg = feat_opts.resolve();
            const auto recs = load_dir(feat_data, feat_session, cfg);
            fs::create_directories(feat_out);
            auto fix = open_out(fs::path(feat_out) / "fixations.csv");
            auto sac = open_out(fs::path(feat_out) / "saccades.csv");
            write_feature_csv_header(fix, SegmentKind::Fixation);
            write_feature_csv_header(sac, SegmentKind::Saccade);
            std::size_t skipped = 0;
            for (const auto& rec : recs) {
                const auto a = analyze(rec, cfg);
                write_feature_csv_rows(fix, rec.subject_id, rec.session_id, a.features.fixations);
                write_feature_csv_rows(sac, rec.subject_id, rec.session_id, a.features.saccades);
                skipped += a.features.skipped;
            }
            if (skipped) std::cerr << "skipped " << skipped << " segments with fewer than 2 valid samples\n";
        });
    });

    // select-features
    ConfigOptions sel_opts;
    std::string sel_data, sel_session = "1", sel_out = "mask.json";
    auto* sel = app.add_subcommand("select-features", "Backward feature selection on training recordings");
    sel->add_option("--data", sel_data, "Dataset directory")->required();
    sel->add_option("--session", sel_session, "Training session")->capture_default_str();
    sel->add_option("--out", sel_out, "Mask file to write")->capture_default_str();
    add_signal_options(sel, sel_opts);
    add_model_options(sel, sel_opts);
    sel->callback([&] {
        status = guarded([&] {
            const auto cfg = sel_opts.resolve();
            const auto pool = pool_features(load_dir(sel_data, sel_session, cfg), cfg);
            const auto masks = select_features(pool, cfg);
            auto out = open_out(sel_out);
            out << masks_to_json(masks).dump(1) << '\n';
            std::cout << "fixation features kept: " << masks.fixation.included_count() << "/" << kFixationFeatureCount
                      << ", saccade features kept: " << masks.saccade.included_count() << "/" << kSaccadeFeatureCount
                      << '\n';
        });
    });

    // train
    ConfigOptions train_opts;
    std::string train_data, train_session = "1", train_out = "model.json";
    auto* train = app.add_subcommand("train", "Enroll every subject from the training session");
    train->add_option("--data", train_data, "Dataset directory")->required();
    train->add_option("--session", train_session, "Training session")->capture_default_str();
    train->add_option("--out", train_out, "Model file to write")->capture_default_str();
    add_signal_options(train, train_opts);
    add_model_options(train, train_opts);
    train->callback([&] {
        status = guarded([&] {
            const auto cfg = train_opts.resolve();
            const auto pool = pool_features(load_dir(train_data, train_session, cfg), cfg);
            for (std::size_t i = 0; i < pool.fixations.size(); ++i) {
                std::cout << pool.fixations[i].id << ": " << pool.fixations[i].rows.rows() << " fixations, "
                          << pool.saccades[i].rows.rows() << " saccades\n";
            }
            if (pool.skipped) std::cout << "skipped " << pool.skipped << " degenerate segments\n";
            const auto model = train_model(pool, cfg, resolve_masks(cfg));
            auto out = open_out(train_out);
            out << serialize_model(model);
            std::cout << "enrolled " << model.class_count() << " subjects: " << model.fixation.neurons.size()
                      << " fixation neurons, " << model.saccade.neurons.size() << " saccade neurons\n";
        });
    });

    // identify
    ConfigOptions id_opts;
    std::string id_model;
    std::vector<std::string> id_files;
    auto* ident = app.add_subcommand("identify", "Identify the subject of each recording");
    ident->add_option("--model", id_model, "Model file")->required();
    ident->add_option("recordings", id_files, "Recording CSV files")->required();
    add_signal_options(ident, id_opts);
    ident->callback([&] {
        status = guarded([&] {
            const auto cfg = id_opts.resolve();
            const auto model = read_model(id_model);
            for (const auto& f : id_files) {
                LoadOptions lo;
                lo.stimulus_kind = cfg.stimulus;
                const auto score = score_recording(model, load_recording(f, cfg.geometry, lo), cfg);
                const auto best = identify(score);
                std::cout << f << ',' << model.identities[best] << ',' << detail::format_double(score.fused(static_cast<Eigen::Index>(best)))
                          << '\n';
            }
        });
    });

    // evaluate
    ConfigOptions eval_opts;
    std::string eval_model, eval_data, eval_session = "2", eval_out = "report";
    bool eval_one_to_one = false;
    auto* eval = app.add_subcommand("evaluate", "Score probe recordings and write metrics");
    eval->add_option("--model", eval_model, "Model file")->required();
    eval->add_option("--data", eval_data, "Dataset directory")->required();
    eval->add_option("--session", eval_session, "Probe session")->capture_default_str();
    eval->add_option("--out", eval_out, "Output directory for report.json, det.csv, cmc.csv")->capture_default_str();
    eval->add_flag("--one-to-one", eval_one_to_one, "Also report rank-1 after one-to-one matching");
    add_signal_options(eval, eval_opts);
    eval->callback([&] {
        status = guarded([&] {
            const auto cfg = eval_opts.resolve();
            const auto model = read_model(eval_model);
            const auto probes = load_dir(eval_data, eval_session, cfg);
            const auto d = score_recordings(model, probes, cfg);
            check_identity_coverage(d);
            const auto rep = evaluate_scores(d, eval_one_to_one);
            fs::create_directories(eval_out);
            {
                auto out = open_out(fs::path(eval_out) / "report.json");
                out << report_to_json(rep).dump(1) << '\n';
            }
            {
                auto out = open_out(fs::path(eval_out) / "det.csv");
                write_det_csv(out, rep.det);
            }
            {
                auto out = open_out(fs::path(eval_out) / "cmc.csv");
                write_cmc_csv(out, rep.cmc);
            }
            std::cout << "probes " << rep.probes << ", identities " << rep.identities << ", R1 " << rep.r1 << ", EER "
                      << rep.eer;
            if (rep.r1_one_to_one) std::cout << ", R1 one-to-one " << *rep.r1_one_to_one;
            std::cout << '\n';
        });
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadSpec;
    }
    return status;
}
