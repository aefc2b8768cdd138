#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "neolog/classify.hpp"
#include "neolog/config.hpp"
#include "neolog/evaluate.hpp"
#include "neolog/lang.hpp"
#include "neolog/pipeline.hpp"

namespace {

struct config_args {
    std::string config_path;
    std::vector<std::string> sets;

    void attach(CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "pipeline config file");
        cmd->add_option("-s,--set", sets, "override a config key, key=value (repeatable)");
    }

    neolog::pipeline_config load() const {
        neolog::pipeline_config cfg;
        if (!config_path.empty()) cfg = neolog::pipeline_config::load(config_path);
        cfg.apply_env();
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw CLI::ValidationError("--set", "expected key=value, got `" + kv + "`");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        return cfg;
    }
};

std::optional<neolog::stage> parse_stage(const std::string& name) {
    if (name.empty()) return std::nullopt;
    return neolog::stage_from_id(name);
}

int run_and_report(const neolog::pipeline_config& cfg, const neolog::run_options& opts) {
    const auto result = neolog::run_pipeline(cfg, opts);
    std::fputs(result.report.render_text().c_str(), stdout);
    if (!result.candidates_path.empty()) {
        std::printf("\ncandidates: %s\n", result.candidates_path.c_str());
        std::printf("final:      %s\n", result.final_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"neolog — finds new words in a comment corpus"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "neolog 1.0.0");

    // run
    auto* run = app.add_subcommand("run", "run the filtering cascade");
    config_args run_cfg;
    run_cfg.attach(run);
    std::string stop_after;
    bool force = false;
    run->add_option("--stop-after", stop_after,
                    "halt after this stage (tokenize, vocab, pattern, concat, typo, freq, "
                    "lang, vote, verify)");
    run->add_flag("--force", force, "ignore checkpoints and recompute every stage");

    // report
    auto* report = app.add_subcommand("report", "render a cascade report");
    std::string report_workdir, counts_path;
    bool report_json = false;
    report->add_option("-w,--workdir", report_workdir, "pipeline work directory");
    report->add_option("--counts", counts_path,
                       "external `name<TAB>remaining` file instead of a workdir");
    report->add_flag("--json", report_json, "emit JSON instead of text");

    // eval-gold
    auto* gold_cmd = app.add_subcommand("eval-gold", "score the final export against gold labels");
    std::string gold_path, gold_final, gold_workdir;
    gold_cmd->add_option("--gold", gold_path, "gold TSV: surface<TAB>label[<TAB>formation]")
        ->required();
    gold_cmd->add_option("--final", gold_final, "final export TSV");
    gold_cmd->add_option("-w,--workdir", gold_workdir, "workdir holding final.tsv");

    // eval-recall
    auto* recall_cmd =
        app.add_subcommand("eval-recall", "recall against an external reference list");
    std::string ref_path, recall_workdir;
    recall_cmd
        ->add_option("--reference", ref_path,
                     "reference TSV: surface<TAB>year<TAB>source<TAB>status")
        ->required();
    recall_cmd->add_option("-w,--workdir", recall_workdir,
                           "workdir with checkpoints, for stage attribution");

    // contexts
    auto* contexts_cmd =
        app.add_subcommand("contexts", "harvest usage snippets for surviving candidates");
    config_args ctx_cfg;
    ctx_cfg.attach(contexts_cmd);

    // classify
    auto* classify_cmd =
        app.add_subcommand("classify", "run the cascade through the majority vote");
    config_args classify_cfg;
    classify_cfg.attach(classify_cmd);

    // verify
    auto* verify_cmd =
        app.add_subcommand("verify", "run the full cascade including verification");
    config_args verify_cfg;
    verify_cfg.attach(verify_cmd);
    std::string verify_tsv;
    verify_cmd->add_option("--tsv", verify_tsv, "also export candidates as TSV to this path");

    // lang-train
    auto* train_cmd = app.add_subcommand(
        "lang-train", "build language profiles from seed word lists (<code>.txt)");
    std::string seeds_dir, profiles_out;
    train_cmd->add_option("--seeds", seeds_dir, "directory of <code>.txt seed lists")->required();
    train_cmd->add_option("--out", profiles_out, "directory to write <code>.profile files")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            neolog::run_options opts;
            opts.stop_after = parse_stage(stop_after);
            opts.force = force;
            return run_and_report(run_cfg.load(), opts);
        }
        if (*report) {
            neolog::cascade_report rep;
            if (!counts_path.empty())
                rep = neolog::cascade_report::from_counts_file(counts_path);
            else if (!report_workdir.empty())
                rep = neolog::cascade_report::from_json_file(report_workdir + "/report.json");
            else
                throw CLI::ValidationError("report", "pass --workdir or --counts");
            std::fputs((report_json ? rep.to_json() + "\n" : rep.render_text()).c_str(), stdout);
            return 0;
        }
        if (*gold_cmd) {
            if (gold_final.empty() && gold_workdir.empty())
                throw CLI::ValidationError("eval-gold", "pass --final or --workdir");
            const auto path = gold_final.empty() ? gold_workdir + "/final.tsv" : gold_final;
            const auto summary =
                neolog::eval_gold(neolog::load_final_tsv(path), neolog::load_gold(gold_path));
            std::fputs(summary.render_text().c_str(), stdout);
            return 0;
        }
        if (*recall_cmd) {
            const auto summary =
                neolog::eval_recall(neolog::load_recall_reference(ref_path), recall_workdir);
            std::fputs(summary.render_text().c_str(), stdout);
            return 0;
        }
        if (*contexts_cmd) {
            std::printf("%s\n", neolog::ensure_contexts(ctx_cfg.load()).c_str());
            return 0;
        }
        if (*classify_cmd) {
            neolog::run_options opts;
            opts.stop_after = neolog::stage::vote;
            return run_and_report(classify_cfg.load(), opts);
        }
        if (*verify_cmd) {
            const auto cfg = verify_cfg.load();
            const int rc = run_and_report(cfg, {});
            if (rc == 0 && !verify_tsv.empty()) {
                neolog::export_candidates_tsv(cfg.workdir + "/candidates.ndjson", verify_tsv);
                std::printf("tsv:        %s\n", verify_tsv.c_str());
            }
            return rc;
        }
        if (*train_cmd) {
            namespace fs = std::filesystem;
            fs::create_directories(profiles_out);
            std::vector<fs::path> seeds;
            for (const auto& e : fs::directory_iterator(seeds_dir))
                if (e.is_regular_file() && e.path().extension() == ".txt")
                    seeds.push_back(e.path());
            std::sort(seeds.begin(), seeds.end());
            for (const auto& p : seeds) {
                const auto code = p.stem().string();
                neolog::ngram_detector det(code);
                det.train_file(code, p.string());
                const auto out = (fs::path(profiles_out) / (code + ".profile")).string();
                det.save_profile(code, out);
                std::printf("%s -> %s\n", p.string().c_str(), out.c_str());
            }
            return 0;
        }
    } catch (const neolog::endpoint_down_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "votes so far are checkpointed; re-run to resume\n");
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
