#include "clustval/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "clustval/csv.hpp"
#include "clustval/error.hpp"
#include "clustval/gmm.hpp"
#include "clustval/hashing.hpp"
#include "clustval/lda.hpp"
#include "clustval/random.hpp"

namespace clustval {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace run_layout {
std::string clustering(const std::string& model) { return "clusterings/" + model + ".csv"; }
std::string model_file(const std::string& model) { return "models/" + model + ".json"; }
std::string metrics(const std::string& model) { return "metrics/" + model + ".json"; }
}  // namespace run_layout

namespace {

void write_json(const fs::path& path, const json& j) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("malformed JSON in " + path.string() + ": " + e.what());
    }
}

}  // namespace

std::vector<ClusterMetrics> load_cluster_metrics(const fs::path& path) {
    std::vector<ClusterMetrics> out;
    for (const auto& row : read_json(path)) out.push_back(cluster_metrics_from_json(row));
    return out;
}

MetricTable metric_table(const std::map<std::string, std::vector<ClusterMetrics>>& per_model,
                         const std::map<std::string, SampleSource>& key_map) {
    MetricTable table;
    for (const auto& [key, src] : key_map) {
        auto it = per_model.find(src.model);
        if (it == per_model.end()) continue;
        for (const auto& m : it->second) {
            if (m.cluster != src.cluster) continue;
            auto& row = table[key];
            for (auto name : kMetricNames) row[std::string(name)] = metric_value(m, name);
        }
    }
    return table;
}

json study_statistics(const RatingSet& ratings, const MetricTable* metrics, std::size_t threads) {
    ratings.validate();
    json icc = json::object();
    for (auto q : kQuestions) icc[to_string(q)] = to_json(icc2k(ratings.grid(q)));
    json out{{"n_reviewers", ratings.reviewers().size()}, {"n_clusters", ratings.cluster_keys().size()}, {"icc", icc}};
    if (metrics) out["correlations"] = to_json(reviewer_metric_correlations(ratings, *metrics, kMetricNames, threads));
    return out;
}

Corpus load_pipeline_corpus(const PipelineConfig& config) {
    CorpusLoadOptions opts;
    opts.tokenizer = config.tokenizer;
    opts.max_text_length = config.max_text_length;
    return load_corpus(config.corpus, config.corpus_format.value_or(corpus_format_for(config.corpus)), opts);
}

std::optional<EmbeddingMatrix> obtain_embeddings(const PipelineConfig& config, const std::vector<std::string>& ids) {
    if (config.embeddings) {
        auto m = load_embeddings(*config.embeddings, embedding_format_for(*config.embeddings));
        return m.aligned_to(ids);
    }
    return std::nullopt;
}

std::vector<std::string> surface_forms(const std::vector<std::string>& stems, const Corpus& corpus) {
    std::map<std::string, std::pair<std::string, std::size_t>> best;
    std::set<std::string> wanted(stems.begin(), stems.end());
    for (const auto& [word, count] : corpus.vocab()) {
        auto s = stem(word);
        if (!wanted.count(s)) continue;
        auto it = best.find(s);
        // vocab iterates in lexicographic order, so ">" keeps the first of ties.
        if (it == best.end() || count > it->second.second) best[s] = {word, count};
    }
    std::vector<std::string> out;
    for (const auto& s : stems) {
        auto it = best.find(s);
        out.push_back(it == best.end() ? s : it->second.first);
    }
    return out;
}

FittedModel fit_model(ModelTag tag, const PipelineConfig& config, const Corpus& corpus,
                      const EmbeddingMatrix* embeddings, std::uint64_t seed) {
    FittedModel f;
    f.tag = tag;
    const std::size_t threads = config.deterministic ? 1 : config.threads;
    switch (tag) {
        case ModelTag::gmm: {
            if (!embeddings) throw Error("GMM needs embeddings (set \"embeddings\" or \"embed_service\")");
            GmmConfig gc = config.gmm;
            gc.threads = threads;
            auto aligned = embeddings->aligned_to(corpus.ids());
            auto model = fit_gmm(aligned, config.k, gc, seed);
            f.clustering = assign(model, aligned);
            f.sigma.emplace();
            for (int c = 0; c < model.k; ++c) f.sigma->push_back(cluster_sigma(model, c));
            f.model_json = model;
            break;
        }
        case ModelTag::lda: {
            auto topic_corpus = corpus.retokenized(config.topic_tokenizer);
            auto model = fit_lda(topic_corpus, config.k, config.lda, seed);
            f.clustering = lda_assign(model);
            for (int c = 0; c < model.k; ++c) {
                auto stems = lda_top_words(model, c, config.packet.top_words);
                f.top_words.push_back(config.topic_tokenizer.stem ? surface_forms(stems, corpus) : stems);
            }
            f.model_json = model;
            break;
        }
        case ModelTag::random:
            f.clustering = random_partition(corpus.ids(), config.k, seed);
            break;
        case ModelTag::external:
            throw Error("external clusterings are not fitted");
    }
    if (f.top_words.empty())
        for (int c = 0; c < f.clustering.k; ++c)
            f.top_words.push_back(
                top_frequent_words(corpus, f.clustering, c, config.packet.top_words, config.tokenizer));
    return f;
}

// ---------------------------------------------------------------------------

json build_manifest(const fs::path& run_dir, const std::vector<std::string>& stages, const json& inputs,
                    const std::optional<std::string>& failed_stage) {
    json files = json::object();
    if (fs::exists(run_dir)) {
        std::vector<fs::path> paths;
        for (const auto& e : fs::recursive_directory_iterator(run_dir))
            if (e.is_regular_file()) paths.push_back(e.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) {
            auto rel = fs::relative(p, run_dir).generic_string();
            if (rel == run_layout::kManifest) continue;
            files[rel] = sha256_file(p);
        }
    }
    json m{{"format", "clustval-run/1"}, {"inputs", inputs}, {"stages", stages}, {"files", files}};
    if (failed_stage) m["failed_stage"] = *failed_stage;
    return m;
}

std::vector<std::string> verify_manifest(const fs::path& run_dir) {
    auto m = read_json(run_dir / run_layout::kManifest);
    std::vector<std::string> bad;
    for (const auto& [rel, hash] : m.at("files").items()) {
        auto p = run_dir / rel;
        if (!fs::exists(p) || sha256_file(p) != hash.get<std::string>()) bad.push_back(rel);
    }
    return bad;
}

RunResult run_pipeline(const PipelineConfig& input_config) {
    PipelineConfig config = input_config;
    config.validate();
    if (config.deterministic) {
        config.threads = 1;
        if (config.judge) {
            config.judge->max_concurrent = 1;
            config.judge->record_latency = false;
        }
    }
    RunResult result;
    result.run_dir = config.out_dir;
    const fs::path& dir = config.out_dir;
    fs::create_directories(dir);

    std::vector<std::string> done;
    json inputs = json::object();
    std::string stage;
    auto run_stage = [&](const std::string& name, const std::function<void()>& fn) {
        stage = name;
        fn();
        done.push_back(name);
    };

    try {
        Corpus corpus;
        std::optional<EmbeddingMatrix> embeddings;

        run_stage("ingest", [&] {
            inputs["corpus"] = sha256_file(config.corpus);
            json saved = to_json(config);
            saved.erase("out_dir");
            write_json(dir / run_layout::kConfig, saved);
            corpus = load_pipeline_corpus(config);
            save_corpus_ndjson(corpus, dir / run_layout::kCorpus);
        });

        run_stage("embed", [&] {
            if (config.embeddings) {
                inputs["embeddings"] = sha256_file(*config.embeddings);
                embeddings = obtain_embeddings(config, corpus.ids());
            } else if (config.embed_service) {
                std::vector<std::string> texts;
                for (const auto& d : corpus.documents()) texts.push_back(d.raw_text);
                embeddings = fetch_embeddings(*config.embed_service, corpus.ids(), texts);
                save_embeddings(*embeddings, dir / run_layout::kEmbeddings, EmbeddingFormat::bin);
            }
        });

        run_stage("cluster", [&] {
            for (auto tag : config.models) {
                auto f = fit_model(tag, config, corpus, embeddings ? &*embeddings : nullptr, config.model_seed(tag));
                const auto name = to_string(tag);
                fs::create_directories(dir / "clusterings");
                save_clustering(f.clustering, dir / run_layout::clustering(name));
                if (!f.model_json.is_null()) write_json(dir / run_layout::model_file(name), f.model_json);
                result.models.push_back(std::move(f));
            }
        });

        run_stage("metrics", [&] {
            MetricOptions mo = config.metrics;
            mo.threads = config.threads;
            for (const auto& f : result.models) {
                std::optional<std::vector<double>> sigma;
                if (config.gmm_sigma && f.sigma) sigma = f.sigma;
                auto rows = compute_cluster_metrics(corpus, f.clustering, f.top_words,
                                                    embeddings ? &*embeddings : nullptr, sigma, mo);
                json arr = json::array();
                for (const auto& r : rows) arr.push_back(to_json(r));
                const auto name = to_string(f.tag);
                write_json(dir / run_layout::metrics(name), arr);
                result.metrics[name] = std::move(rows);
            }
        });

        run_stage("packet", [&] {
            std::vector<PacketModel> pm;
            for (const auto& f : result.models) pm.push_back({to_string(f.tag), &corpus, &f.clustering, f.top_words});
            result.packet = make_review_packet(pm, derive_seed(config.seed, 0x7061636bULL), config.packet);
            fs::create_directories(dir / "packet");
            save_review_packet(result.packet, dir / run_layout::kPacket, dir / run_layout::kKeyMap);
        });

        if (config.run_judge) {
            run_stage("judge", [&] {
                fs::create_directories(dir / "judge");
                auto names = collect_names(*config.judge, result.packet, dir / run_layout::kJudgeLog);
                save_name_set(names, dir / run_layout::kJudgeNames);
                auto keys = result.packet.key_map();
                write_json(dir / run_layout::kJudgeNameMetrics, to_json(compute_name_metrics(names, &keys)));
                result.judge_names = std::move(names);
            });
        }
    } catch (const std::exception& e) {
        write_json(dir / run_layout::kManifest, build_manifest(dir, done, inputs, stage));
        throw Error("stage " + stage + ": " + e.what());
    }

    result.manifest = build_manifest(dir, done, inputs, std::nullopt);
    write_json(dir / run_layout::kManifest, result.manifest);
    return result;
}

// ---------------------------------------------------------------------------

StabilityResult stability_study(const PipelineConfig& config, ModelTag model, int n_seeds,
                                const std::vector<std::uint64_t>& seeds) {
    if (model != ModelTag::gmm && model != ModelTag::lda && model != ModelTag::random)
        throw Error("stability study supports gmm, lda and random");
    StabilityResult r;
    r.model = model;
    r.seeds = seeds;
    if (r.seeds.empty()) {
        if (n_seeds < 2) throw Error("stability study needs at least two seeds");
        for (int i = 0; i < n_seeds; ++i) r.seeds.push_back(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(i)));
    }
    auto corpus = load_pipeline_corpus(config);
    std::optional<EmbeddingMatrix> embeddings;
    if (model == ModelTag::gmm) {
        embeddings = obtain_embeddings(config, corpus.ids());
        if (!embeddings) throw Error("GMM stability study needs embeddings");
    }
    std::vector<Clustering> fits;
    for (auto seed : r.seeds) {
        try {
            fits.push_back(fit_model(model, config, corpus, embeddings ? &*embeddings : nullptr, seed).clustering);
        } catch (const Error& e) {
            r.failures.emplace_back(seed, e.what());
        }
    }
    if (fits.size() < 2) throw Error("stability study: fewer than two successful fits");
    r.ami = pairwise_ami(fits, config.deterministic ? 1 : config.threads);
    r.histogram.assign(20, 0);
    for (double v : r.ami.values) {
        auto bin = static_cast<long>(std::floor(std::clamp(v, 0.0, 1.0) * 20));
        ++r.histogram[static_cast<std::size_t>(std::min(bin, 19L))];
    }
    return r;
}

json to_json(const StabilityResult& r) {
    json pairs = json::array();
    for (std::size_t i = 0; i < r.ami.pairs.size(); ++i)
        pairs.push_back({{"a", r.ami.pairs[i].first}, {"b", r.ami.pairs[i].second}, {"ami", r.ami.values[i]}});
    json failures = json::array();
    for (const auto& [seed, msg] : r.failures) failures.push_back({{"seed", seed}, {"error", msg}});
    return json{{"model", to_string(r.model)},
                {"seeds", r.seeds},
                {"n_pairs", r.ami.values.size()},
                {"mean", r.ami.mean},
                {"sd", r.ami.sd},
                {"pairs", pairs},
                {"histogram", {{"bins", 20}, {"range", {0.0, 1.0}}, {"counts", r.histogram}}},
                {"failures", failures}};
}

// ---------------------------------------------------------------------------

namespace {

// Most frequent name (case-insensitive), lexicographic among ties.
std::string modal_name(const std::vector<std::string>& names) {
    std::map<std::string, std::pair<std::size_t, std::string>> counts;
    for (const auto& n : names) {
        if (n.empty()) continue;
        std::string key;
        for (char c : n) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        auto& slot = counts[key];
        if (slot.first++ == 0) slot.second = n;
    }
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [key, v] : counts)
        if (v.first > best_count) {
            best_count = v.first;
            best = v.second;
        }
    return best;
}

std::string fmt(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return "";
    std::ostringstream ss;
    ss.precision(17);
    ss << *v;
    return ss.str();
}

json opt_json(const std::optional<double>& v) { return v && std::isfinite(*v) ? json(*v) : json(nullptr); }

}  // namespace

Report build_report(const fs::path& run_dir) {
    if (!fs::exists(run_dir / run_layout::kManifest)) throw Error("missing manifest: " + (run_dir / run_layout::kManifest).string());
    auto manifest = read_json(run_dir / run_layout::kManifest);
    if (manifest.contains("failed_stage")) throw Error("run did not complete: stage " + manifest["failed_stage"].get<std::string>() + " failed");
    auto config = read_json(run_dir / run_layout::kConfig);

    std::map<std::pair<std::string, int>, std::string> key_of;
    if (fs::exists(run_dir / run_layout::kKeyMap))
        for (const auto& [key, src] : load_key_map(run_dir / run_layout::kKeyMap)) key_of[{src.model, src.cluster}] = key;

    std::map<std::string, std::string> judge_name;
    Report report;
    if (fs::exists(run_dir / run_layout::kJudgeNames)) {
        auto names = load_name_set(run_dir / run_layout::kJudgeNames);
        for (const auto& [key, list] : names.names) judge_name[key] = modal_name(list);
        auto keys = load_key_map(run_dir / run_layout::kKeyMap);
        report.judge_name_metrics = to_json(compute_name_metrics(names, &keys));
    }
    if (fs::exists(run_dir / run_layout::kHumanResponses)) {
        auto ratings = load_responses(run_dir / run_layout::kHumanResponses);
        auto keys = load_key_map(run_dir / run_layout::kKeyMap);
        report.human_name_metrics = to_json(compute_name_metrics(names_from_ratings(ratings), &keys));
    }
    std::map<std::pair<std::string, int>, std::string> author;
    if (fs::exists(run_dir / run_layout::kAuthorNames)) {
        auto recs = csv::read_file(run_dir / run_layout::kAuthorNames);
        for (std::size_t i = 1; i < recs.size(); ++i) {
            const auto& f = recs[i].fields;
            if (f.size() < 3) throw ParseError("author names need model,cluster,name", recs[i].line);
            author[{f[0], std::stoi(f[1])}] = f[2];
        }
    }

    for (const auto& m : config.at("models")) {
        const auto model = m.get<std::string>();
        auto path = run_dir / run_layout::metrics(model);
        if (!fs::exists(path)) throw Error("missing metrics for model " + model + ": " + path.string());
        for (const auto& row : read_json(path)) {
            ReportRow r;
            r.model = model;
            r.metrics = cluster_metrics_from_json(row);
            r.cluster = r.metrics.cluster;
            if (auto it = key_of.find({model, r.cluster}); it != key_of.end()) r.cluster_key = it->second;
            if (auto it = judge_name.find(r.cluster_key); it != judge_name.end()) r.judge_name = it->second;
            if (auto it = author.find({model, r.cluster}); it != author.end()) r.author_name = it->second;
            report.rows.push_back(std::move(r));
        }
    }
    return report;
}

json to_json(const Report& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        const auto& m = row.metrics;
        rows.push_back({{"model", row.model},
                        {"cluster", row.cluster},
                        {"author_name", row.author_name},
                        {"judge_name", row.judge_name},
                        {"keywords", m.keywords ? json(*m.keywords) : json(nullptr)},
                        {"cv", opt_json(m.cv)},
                        {"umass", opt_json(m.umass)},
                        {"distance", opt_json(m.min_centroid_distance)},
                        {"silhouette", opt_json(m.mean_silhouette)},
                        {"mean_sd", opt_json(m.mean_sd)}});
    }
    json j{{"columns", kReportColumns}, {"rows", rows}};
    if (r.judge_name_metrics) j["judge_name_metrics"] = *r.judge_name_metrics;
    if (r.human_name_metrics) j["human_name_metrics"] = *r.human_name_metrics;
    return j;
}

std::string report_csv(const Report& r) {
    std::ostringstream out;
    csv::write_row(out, std::vector<std::string>(kReportColumns.begin(), kReportColumns.end()));
    for (const auto& row : r.rows) {
        const auto& m = row.metrics;
        csv::write_row(out, {row.model, std::to_string(row.cluster), row.author_name, row.judge_name,
                             m.keywords ? std::to_string(*m.keywords) : "", fmt(m.cv), fmt(m.umass),
                             fmt(m.min_centroid_distance), fmt(m.mean_silhouette), fmt(m.mean_sd)});
    }
    return out.str();
}

void write_report(const Report& r, const fs::path& run_dir) {
    write_json(run_dir / "report.json", to_json(r));
    std::ofstream out(run_dir / "report.csv");
    if (!out) throw Error("cannot write " + (run_dir / "report.csv").string());
    out << report_csv(r);
}

}  // namespace clustval
