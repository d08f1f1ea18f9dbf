#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clustval/autometrics.hpp"
#include "clustval/config.hpp"
#include "clustval/csv.hpp"
#include "clustval/error.hpp"
#include "clustval/gmm.hpp"
#include "clustval/judge.hpp"
#include "clustval/namemetrics.hpp"
#include "clustval/partition.hpp"
#include "clustval/pipeline.hpp"
#include "clustval/random.hpp"
#include "clustval/review_server.hpp"
#include "clustval/stats.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace clustval;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    bool deterministic = false;
    std::string config;
    std::string out = ".";
    std::size_t threads = 0;
};

PipelineConfig effective_config(const Globals& g) {
    PipelineConfig c;
    if (!g.config.empty()) c = load_pipeline_config(g.config);
    if (g.seed) c.seed = *g.seed;
    if (g.deterministic) c.deterministic = true;
    if (g.threads) c.threads = g.threads;
    if (c.deterministic) c.threads = 1;
    return c;
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return json::parse(in);
}

// "name=path" -> {name, path}
std::pair<std::string, fs::path> named_path(const std::string& arg) {
    auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("expected NAME=PATH, got " + arg);
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

Corpus corpus_from(const PipelineConfig& c, const std::string& path) {
    PipelineConfig copy = c;
    if (!path.empty()) {
        copy.corpus = path;
        copy.corpus_format.reset();
    }
    if (copy.corpus.empty()) throw Error("no corpus given (--corpus or config \"corpus\")");
    return load_pipeline_corpus(copy);
}

std::optional<EmbeddingMatrix> embeddings_from(const PipelineConfig& c, const std::string& path,
                                               const std::vector<std::string>& ids) {
    if (!path.empty()) return load_embeddings(path, embedding_format_for(path)).aligned_to(ids);
    return obtain_embeddings(c, ids);
}

std::vector<std::vector<std::string>> load_top_words(const fs::path& path) {
    return read_json(path).get<std::vector<std::vector<std::string>>>();
}

fs::path top_words_path(const fs::path& out, const std::string& model) {
    return out / ("models/" + model + ".top_words.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clustval: short-text clustering and evaluation toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Base random seed");
    app.add_flag("--deterministic", g.deterministic, "Single-threaded, byte-reproducible outputs");
    app.add_option("--config", g.config, "Pipeline config (TOML or JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Load and tokenize a corpus into <out>/corpus.ndjson");
    std::string corpus_path;
    ingest->add_option("--corpus", corpus_path, "NDJSON or CSV corpus");

    // embed
    auto* embed = app.add_subcommand("embed", "Fetch embeddings from an OpenAI-compatible service");
    std::string api_base, embed_model;
    embed->add_option("--corpus", corpus_path, "Corpus");
    embed->add_option("--api-base", api_base, "Service base URL (overrides config)");
    embed->add_option("--model", embed_model, "Embedding model id");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "Fit gmm, lda or random and write the clustering");
    std::string model_name, embeddings_path;
    int k = 0;
    cluster->add_option("model", model_name, "gmm | lda | random")->required()->check(CLI::IsMember({"gmm", "lda", "random"}));
    cluster->add_option("--corpus", corpus_path, "Corpus");
    cluster->add_option("--embeddings", embeddings_path, "Embeddings (NDJSON or BEMB)");
    cluster->add_option("-k,--clusters", k, "Number of clusters");

    // sample
    auto* sample = app.add_subcommand("sample", "Build the blinded review packet from clusterings");
    std::vector<std::string> clusterings, top_words_args;
    sample->add_option("--corpus", corpus_path, "Corpus");
    sample->add_option("--clustering", clusterings, "NAME=PATH, repeatable")->required();
    sample->add_option("--top-words", top_words_args, "NAME=PATH of per-cluster top words, repeatable");

    // export-review
    auto* export_review = app.add_subcommand("export-review", "Write the public packet and a blank response sheet");
    std::string packet_path, output_path;
    export_review->add_option("--packet", packet_path, "packet.json")->required()->check(CLI::ExistingFile);

    // serve-review
    auto* serve = app.add_subcommand("serve-review", "Serve the review UI and its API");
    std::string responses_path, static_dir, host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--packet", packet_path, "packet.json")->required()->check(CLI::ExistingFile);
    serve->add_option("--responses", responses_path, "Responses CSV (appended)");
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--static", static_dir, "Built review-ui assets")->check(CLI::ExistingDirectory);

    // import-responses
    auto* import_resp = app.add_subcommand("import-responses", "Validate and merge reviewer response files");
    std::vector<std::string> response_files;
    bool no_none_override = false;
    import_resp->add_option("responses", response_files, "Response CSV files")->required()->check(CLI::ExistingFile);
    import_resp->add_flag("--no-none-override", no_none_override, "Keep the stated confidence for \"None\" names");

    // judge
    auto* judge = app.add_subcommand("judge", "Collect cluster names from an LLM judge");
    std::string judge_model;
    int repetitions = 0;
    std::size_t max_concurrent = 0;
    judge->add_option("--packet", packet_path, "packet.json")->required()->check(CLI::ExistingFile);
    judge->add_option("--api-base", api_base, "Chat-completions base URL");
    judge->add_option("--model", judge_model, "Judge model id");
    judge->add_option("--repetitions", repetitions, "Names per cluster");
    judge->add_option("--max-concurrent", max_concurrent, "Concurrent requests");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Automated metrics for one clustering");
    std::string clustering_path, top_words_path_arg, gmm_model_path;
    metrics->add_option("--corpus", corpus_path, "Corpus");
    metrics->add_option("--clustering", clustering_path, "Clustering CSV")->required()->check(CLI::ExistingFile);
    metrics->add_option("--embeddings", embeddings_path, "Embeddings");
    metrics->add_option("--top-words", top_words_path_arg, "Per-cluster top words JSON")->check(CLI::ExistingFile);
    metrics->add_option("--gmm-model", gmm_model_path, "GMM model JSON for the component-sigma column")->check(CLI::ExistingFile);

    // name-metrics
    auto* name_metrics = app.add_subcommand("name-metrics", "Interpretability and distinctiveness of names");
    std::string names_path, key_map_path;
    bool once_per_name = false;
    name_metrics->add_option("--names", names_path, "NameSet JSON")->check(CLI::ExistingFile);
    name_metrics->add_option("--responses", responses_path, "Reviewer responses CSV")->check(CLI::ExistingFile);
    name_metrics->add_option("--key-map", key_map_path, "key_map.json")->check(CLI::ExistingFile);
    name_metrics->add_flag("--once-per-name", once_per_name, "Count a word at most once per name");

    // stats
    auto* stats = app.add_subcommand("stats", "ICC(2,k) and reviewer-metric correlations");
    std::vector<std::string> metric_files;
    stats->add_option("--responses", responses_path, "Reviewer responses CSV")->required()->check(CLI::ExistingFile);
    stats->add_option("--key-map", key_map_path, "key_map.json")->check(CLI::ExistingFile);
    stats->add_option("--metrics", metric_files, "MODEL=PATH metric reports, repeatable");

    // stability
    auto* stability = app.add_subcommand("stability", "Pairwise AMI across seeds");
    int n_seeds = 50;
    stability->add_option("model", model_name, "gmm | lda | random")->required()->check(CLI::IsMember({"gmm", "lda", "random"}));
    stability->add_option("--n-seeds", n_seeds)->capture_default_str();

    // report
    auto* report = app.add_subcommand("report", "Per-cluster metric table for a run directory");
    std::string run_dir;
    report->add_option("run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    // convert-embeddings
    auto* convert = app.add_subcommand("convert-embeddings", "Convert between NDJSON and BEMB embeddings");
    std::string in_path;
    convert->add_option("input", in_path)->required()->check(CLI::ExistingFile);
    convert->add_option("output", output_path)->required();

    // run
    auto* run = app.add_subcommand("run", "Run the whole pipeline from --config");

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path out = g.out;
        PipelineConfig cfg = effective_config(g);

        if (*ingest) {
            auto c = corpus_from(cfg, corpus_path);
            fs::create_directories(out);
            save_corpus_ndjson(c, out / run_layout::kCorpus);
            std::cout << "documents: " << c.size() << "\ntokens: " << c.n_tokens() << "\nvocabulary: " << c.vocab().size()
                      << "\nwrote " << (out / run_layout::kCorpus).string() << '\n';
        } else if (*embed) {
            EmbedServiceConfig ec = cfg.embed_service.value_or(EmbedServiceConfig{});
            if (!api_base.empty()) ec.endpoint.base_url = api_base;
            if (!embed_model.empty()) ec.model = embed_model;
            if (ec.endpoint.bearer_token.empty()) ec.endpoint.bearer_token = http::env_or_empty("EMBED_API_KEY");
            if (ec.endpoint.base_url.empty()) throw Error("no embedding service (--api-base or config embed_service)");
            if (cfg.deterministic) ec.max_concurrent = 1;
            auto c = corpus_from(cfg, corpus_path);
            std::vector<std::string> texts;
            for (const auto& d : c.documents()) texts.push_back(d.raw_text);
            auto m = fetch_embeddings(ec, c.ids(), texts);
            fs::create_directories(out);
            save_embeddings(m, out / run_layout::kEmbeddings, EmbeddingFormat::bin);
            std::cout << "embedded " << m.size() << " documents (d=" << m.dim() << ")\n";
        } else if (*cluster) {
            auto tag = parse_model_tag(model_name);
            if (k) cfg.k = k;
            auto c = corpus_from(cfg, corpus_path);
            auto emb = embeddings_from(cfg, embeddings_path, c.ids());
            auto f = fit_model(tag, cfg, c, emb ? &*emb : nullptr, cfg.model_seed(tag));
            fs::create_directories(out / "clusterings");
            save_clustering(f.clustering, out / run_layout::clustering(model_name));
            if (!f.model_json.is_null()) write_json(out / run_layout::model_file(model_name), f.model_json);
            write_json(top_words_path(out, model_name), f.top_words);
            auto sizes = f.clustering.cluster_sizes();
            std::cout << model_name << ": K=" << f.clustering.k << " sizes";
            for (auto s : sizes) std::cout << ' ' << s;
            std::cout << "\nwrote " << (out / run_layout::clustering(model_name)).string() << '\n';
        } else if (*sample) {
            auto c = corpus_from(cfg, corpus_path);
            std::map<std::string, fs::path> tw_paths;
            for (const auto& a : top_words_args) tw_paths.insert(named_path(a));
            std::vector<Clustering> loaded;
            std::vector<std::string> names;
            for (const auto& a : clusterings) {
                auto [name, path] = named_path(a);
                names.push_back(name);
                loaded.push_back(load_clustering(path));
            }
            std::vector<PacketModel> pm;
            for (std::size_t i = 0; i < loaded.size(); ++i) {
                PacketModel m{names[i], &c, &loaded[i], std::nullopt};
                if (auto it = tw_paths.find(names[i]); it != tw_paths.end()) m.top_words = load_top_words(it->second);
                pm.push_back(std::move(m));
            }
            auto packet = make_review_packet(pm, derive_seed(cfg.seed, 0x7061636bULL), cfg.packet);
            save_review_packet(packet, out / run_layout::kPacket, out / run_layout::kKeyMap);
            std::cout << "packet " << packet.packet_id << ": " << packet.samples.size() << " samples";
            if (!packet.skipped.empty()) std::cout << ", " << packet.skipped.size() << " empty clusters skipped";
            std::cout << '\n';
        } else if (*export_review) {
            auto packet = load_review_packet(packet_path);
            fs::create_directories(out);
            write_json(out / "packet.json", packet_to_json(packet));
            std::ofstream sheet(out / "responses_template.csv");
            sheet << kResponsesHeader << '\n';
            for (const auto& s : packet.samples) csv::write_row(sheet, {"", s.cluster_key, "", "", "", "", ""});
            std::cout << "exported " << packet.samples.size() << " samples to " << out.string() << '\n';
        } else if (*serve) {
            auto packet = load_review_packet(packet_path);
            ReviewServerOptions so;
            so.host = host;
            so.port = port;
            if (!static_dir.empty()) so.static_dir = static_dir;
            fs::path rp = responses_path.empty() ? out / run_layout::kHumanResponses : fs::path(responses_path);
            if (rp.has_parent_path()) fs::create_directories(rp.parent_path());
            ReviewServer server(std::move(packet), rp, so);
            std::cout << "serving " << host << ':' << port << ", responses -> " << rp.string() << std::endl;
            server.listen();
        } else if (*import_resp) {
            const fs::path dest = out / run_layout::kHumanResponses;
            RatingSet merged;
            if (fs::exists(dest)) merged = load_responses(dest, false);
            std::size_t added = 0, skipped = 0;
            for (const auto& f : response_files) {
                auto rs = load_responses(f, !no_none_override);
                for (auto& r : rs.rows) {
                    if (const auto* prev = merged.find(r.reviewer_id, r.cluster_key)) {
                        if (prev->name != r.name || prev->values != r.values)
                            throw Error("conflicting responses for reviewer " + r.reviewer_id + ", cluster " +
                                        r.cluster_key + " in " + f);
                        ++skipped;
                        continue;
                    }
                    merged.rows.push_back(std::move(r));
                    ++added;
                }
            }
            fs::create_directories(dest.parent_path());
            save_responses(merged, dest);
            save_name_set(names_from_ratings(merged), out / "review/names.json");
            std::cout << "imported " << added << " rows (" << skipped << " already present), " << merged.rows.size()
                      << " total from " << merged.reviewers().size() << " reviewers\n";
        } else if (*judge) {
            JudgeConfig jc = cfg.judge.value_or(JudgeConfig{});
            if (!api_base.empty()) jc.endpoint.base_url = api_base;
            if (!judge_model.empty()) jc.model_id = judge_model;
            if (repetitions) jc.repetitions = repetitions;
            if (max_concurrent) jc.max_concurrent = max_concurrent;
            if (jc.endpoint.bearer_token.empty()) jc.endpoint.bearer_token = http::env_or_empty("JUDGE_API_KEY");
            if (g.seed) jc.seed = *g.seed;
            if (cfg.deterministic) {
                jc.max_concurrent = 1;
                jc.record_latency = false;
            }
            auto packet = load_review_packet(packet_path);
            CollectStats st;
            auto names = collect_names(jc, packet, out / run_layout::kJudgeLog, &st);
            save_name_set(names, out / run_layout::kJudgeNames);
            std::cout << "requested " << st.requested << ", resumed " << st.resumed << ", None " << st.none_answers
                      << ", over word limit " << st.violations << "\nwrote " << (out / run_layout::kJudgeNames).string()
                      << '\n';
        } else if (*metrics) {
            auto c = corpus_from(cfg, corpus_path);
            auto cl = load_clustering(clustering_path);
            auto emb = embeddings_from(cfg, embeddings_path, c.ids());
            std::vector<std::vector<std::string>> tw;
            if (!top_words_path_arg.empty()) {
                tw = load_top_words(top_words_path_arg);
            } else {
                for (int i = 0; i < cl.k; ++i) tw.push_back(top_frequent_words(c, cl, i, cfg.packet.top_words, cfg.tokenizer));
            }
            std::optional<std::vector<double>> sigma;
            if (!gmm_model_path.empty()) {
                auto m = read_json(gmm_model_path).get<GmmModel>();
                sigma.emplace();
                for (int i = 0; i < m.k; ++i) sigma->push_back(cluster_sigma(m, i));
            }
            MetricOptions mo = cfg.metrics;
            mo.threads = cfg.threads;
            auto rows = compute_cluster_metrics(c, cl, tw, emb ? &*emb : nullptr, sigma, mo);
            json arr = json::array();
            for (const auto& r : rows) arr.push_back(to_json(r));
            auto dest = out / run_layout::metrics(to_string(cl.model_tag));
            write_json(dest, arr);
            std::cout << "wrote " << dest.string() << '\n';
        } else if (*name_metrics) {
            NameSet ns;
            if (!names_path.empty())
                ns = load_name_set(names_path);
            else if (!responses_path.empty())
                ns = names_from_ratings(load_responses(responses_path));
            else
                throw Error("give --names or --responses");
            std::map<std::string, SampleSource> km;
            if (!key_map_path.empty()) km = load_key_map(key_map_path);
            NameMetricOptions no;
            no.tokenizer = cfg.tokenizer;
            no.once_per_name = once_per_name;
            auto r = compute_name_metrics(ns, key_map_path.empty() ? nullptr : &km, no);
            auto dest = out / "name_metrics.json";
            write_json(dest, to_json(r));
            for (const auto& [model, s] : r.models)
                std::cout << model << ": I " << s.mean_i << " (sd " << s.sd_i << "), D " << s.mean_d << " (sd " << s.sd_d
                          << "), " << s.n_clusters << " clusters\n";
            std::cout << "wrote " << dest.string() << '\n';
        } else if (*stats) {
            auto ratings = load_responses(responses_path);
            std::optional<MetricTable> table;
            if (!metric_files.empty()) {
                if (key_map_path.empty()) throw Error("--metrics needs --key-map");
                std::map<std::string, std::vector<ClusterMetrics>> per_model;
                for (const auto& a : metric_files) {
                    auto [name, path] = named_path(a);
                    per_model[name] = load_cluster_metrics(path);
                }
                table = metric_table(per_model, load_key_map(key_map_path));
            }
            auto j = study_statistics(ratings, table ? &*table : nullptr, cfg.threads);
            auto dest = out / "stats.json";
            write_json(dest, j);
            for (const auto& [q, r] : j["icc"].items()) std::cout << "ICC(2,k) " << q << ": " << r["icc"] << '\n';
            std::cout << "wrote " << dest.string() << '\n';
        } else if (*stability) {
            auto r = stability_study(cfg, parse_model_tag(model_name), n_seeds);
            auto dest = out / ("stability_" + model_name + ".json");
            write_json(dest, to_json(r));
            std::cout << model_name << ": " << r.ami.values.size() << " pairs, mean AMI " << r.ami.mean << " (sd "
                      << r.ami.sd << ")";
            if (!r.failures.empty()) std::cout << ", " << r.failures.size() << " seeds failed";
            std::cout << "\nwrote " << dest.string() << '\n';
        } else if (*report) {
            auto r = build_report(run_dir);
            write_report(r, run_dir);
            std::cout << r.rows.size() << " rows; wrote report.json and report.csv in " << run_dir << '\n';
        } else if (*convert) {
            auto m = load_embeddings(in_path, embedding_format_for(in_path));
            save_embeddings(m, output_path, embedding_format_for(output_path));
            std::cout << "converted " << m.size() << " vectors (d=" << m.dim() << ")\n";
        } else if (*run) {
            if (g.config.empty()) throw Error("run needs --config");
            if (app.get_option("--out")->count()) cfg.out_dir = out;
            auto r = run_pipeline(cfg);
            write_report(build_report(r.run_dir), r.run_dir);
            std::cout << "run complete: " << r.run_dir.string() << " (" << r.models.size() << " models, "
                      << r.packet.samples.size() << " packet samples)\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
