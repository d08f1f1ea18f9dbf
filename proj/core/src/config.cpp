#include "clustval/config.hpp"

#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "clustval/error.hpp"
#include "clustval/random.hpp"

namespace clustval {

using json = nlohmann::json;

namespace {

json toml_to_json(const toml::node& node) {
    if (auto* t = node.as_table()) {
        json j = json::object();
        for (const auto& [key, value] : *t) j[std::string(key.str())] = toml_to_json(value);
        return j;
    }
    if (auto* a = node.as_array()) {
        json j = json::array();
        for (const auto& value : *a) j.push_back(toml_to_json(value));
        return j;
    }
    if (auto v = node.value<bool>(); node.is_boolean()) return *v;
    if (node.is_integer()) return *node.value<std::int64_t>();
    if (node.is_floating_point()) return *node.value<double>();
    if (node.is_string()) return *node.value<std::string>();
    std::ostringstream ss;
    if (auto* d = node.as_date()) ss << *d;
    else if (auto* tm = node.as_time()) ss << *tm;
    else if (auto* dt = node.as_date_time()) ss << *dt;
    return ss.str();
}

}  // namespace

json load_config_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (path.extension() == ".toml") {
        try {
            return toml_to_json(toml::parse(text, path.string()));
        } catch (const toml::parse_error& e) {
            throw ParseError("TOML config " + path.string() + ": " + std::string(e.description()),
                             e.source().begin.line);
        }
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("JSON config " + path.string() + ": " + e.what());
    }
}

void to_json(json& j, const GmmConfig& c) {
    j = json{{"max_iter", c.max_iter},
             {"rel_tol", c.rel_tol},
             {"var_floor", c.var_floor},
             {"n_init", c.n_init},
             {"threads", c.threads}};
}

void from_json(const json& j, GmmConfig& c) {
    c.max_iter = j.value("max_iter", c.max_iter);
    c.rel_tol = j.value("rel_tol", c.rel_tol);
    c.var_floor = j.value("var_floor", c.var_floor);
    c.n_init = j.value("n_init", c.n_init);
    c.threads = j.value("threads", c.threads);
}

void to_json(json& j, const LdaConfig& c) {
    j = json{{"alpha", c.alpha},
             {"beta", c.beta},
             {"sweeps", c.sweeps},
             {"burn_in", c.burn_in},
             {"sample_lag", c.sample_lag},
             {"verify_counts", c.verify_counts}};
}

void from_json(const json& j, LdaConfig& c) {
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.sweeps = j.value("sweeps", c.sweeps);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.sample_lag = j.value("sample_lag", c.sample_lag);
    c.verify_counts = j.value("verify_counts", c.verify_counts);
}

void to_json(json& j, const MetricOptions& c) {
    j = json{{"metric", to_string(c.metric)},
             {"reference", c.reference == KeynessReference::complement ? "complement" : "whole"},
             {"keyword_threshold", c.keyword_threshold},
             {"cv_window", c.cv_window},
             {"threads", c.threads}};
}

void from_json(const json& j, MetricOptions& c) {
    if (j.contains("metric")) c.metric = parse_metric(j["metric"].get<std::string>());
    if (j.contains("reference")) c.reference = parse_keyness_reference(j["reference"].get<std::string>());
    c.keyword_threshold = j.value("keyword_threshold", c.keyword_threshold);
    c.cv_window = j.value("cv_window", c.cv_window);
    c.threads = j.value("threads", c.threads);
}

void to_json(json& j, const EmbedServiceConfig& c) {
    j = json{{"api_base", c.endpoint.base_url},
             {"model", c.model},
             {"batch_size", c.batch_size},
             {"max_concurrent", c.max_concurrent},
             {"request_timeout", c.endpoint.timeout.count()},
             {"max_retries", c.retry.max_retries}};
}

void from_json(const json& j, EmbedServiceConfig& c) {
    c.endpoint.base_url = j.value("api_base", c.endpoint.base_url);
    c.model = j.value("model", c.model);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_concurrent = j.value("max_concurrent", c.max_concurrent);
    c.endpoint.timeout = std::chrono::seconds(j.value("request_timeout", c.endpoint.timeout.count()));
    c.retry.max_retries = j.value("max_retries", c.retry.max_retries);
    if (j.contains("initial_backoff_ms"))
        c.retry.initial_backoff = std::chrono::milliseconds(j["initial_backoff_ms"].get<long long>());
}

void PipelineConfig::validate() const {
    if (corpus.empty()) throw Error("config: corpus path is required");
    if (models.empty()) throw Error("config: at least one model is required");
    if (k < 2) throw Error("config: K must be at least 2");
    if (judge) judge->validate();
    if (run_judge && !judge) throw Error("config: run_judge needs a [judge] section");
}

std::uint64_t PipelineConfig::model_seed(ModelTag tag) const {
    if (auto it = seeds.find(to_string(tag)); it != seeds.end()) return it->second;
    return derive_seed(seed, static_cast<std::uint64_t>(tag) + 1);
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute() || base.empty()) return path;
    return base / path;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    PipelineConfig c;
    try {
        if (!j.is_object()) throw Error("config must be an object");
        if (j.contains("corpus")) c.corpus = resolve(base_dir, j["corpus"].get<std::string>());
        if (j.contains("corpus_format")) c.corpus_format = parse_corpus_format(j["corpus_format"].get<std::string>());
        c.max_text_length = j.value("max_text_length", c.max_text_length);
        if (j.contains("embeddings") && !j["embeddings"].is_null())
            c.embeddings = resolve(base_dir, j["embeddings"].get<std::string>());
        if (j.contains("embed_service")) {
            EmbedServiceConfig e = j["embed_service"].get<EmbedServiceConfig>();
            e.endpoint.bearer_token = http::env_or_empty("EMBED_API_KEY");
            c.embed_service = e;
        }
        if (j.contains("models")) {
            c.models.clear();
            for (const auto& m : j["models"]) {
                auto tag = parse_model_tag(m.get<std::string>());
                if (tag == ModelTag::external) throw Error("model \"external\" cannot be fitted");
                c.models.push_back(tag);
            }
        }
        c.k = j.value("k", j.value("K", c.k));
        c.seed = j.value("seed", c.seed);
        if (j.contains("seeds")) c.seeds = j["seeds"].get<std::map<std::string, std::uint64_t>>();
        if (j.contains("tokenizer")) c.tokenizer = j["tokenizer"].get<TokenizerConfig>();
        if (j.contains("topic_tokenizer")) c.topic_tokenizer = j["topic_tokenizer"].get<TokenizerConfig>();
        if (j.contains("gmm")) c.gmm = j["gmm"].get<GmmConfig>();
        if (j.contains("lda")) c.lda = j["lda"].get<LdaConfig>();
        if (j.contains("metrics")) {
            c.metrics = j["metrics"].get<MetricOptions>();
            c.gmm_sigma = j["metrics"].value("gmm_sigma", c.gmm_sigma);
        }
        if (j.contains("packet")) {
            const auto& p = j["packet"];
            c.packet.top_words = p.value("top_words", c.packet.top_words);
            c.packet.bios_per_cluster = p.value("bios_per_cluster", c.packet.bios_per_cluster);
        }
        c.packet.tokenizer = c.tokenizer;
        if (j.contains("judge")) {
            JudgeConfig jc = j["judge"].get<JudgeConfig>();
            jc.endpoint.bearer_token = http::env_or_empty("JUDGE_API_KEY");
            c.run_judge = j["judge"].value("enabled", false);
            c.judge = jc;
        }
        if (j.contains("out_dir")) c.out_dir = resolve(base_dir, j["out_dir"].get<std::string>());
        c.deterministic = j.value("deterministic", c.deterministic);
        c.threads = j.value("threads", c.threads);
    } catch (const json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    return pipeline_config_from_json(load_config_document(path), path.parent_path());
}

json to_json(const PipelineConfig& c) {
    json models = json::array();
    for (auto m : c.models) models.push_back(to_string(m));
    json j{{"corpus", c.corpus.generic_string()},
           {"max_text_length", c.max_text_length},
           {"embeddings", c.embeddings ? json(c.embeddings->generic_string()) : json(nullptr)},
           {"models", models},
           {"k", c.k},
           {"seed", c.seed},
           {"seeds", c.seeds},
           {"tokenizer", c.tokenizer},
           {"topic_tokenizer", c.topic_tokenizer},
           {"gmm", c.gmm},
           {"lda", c.lda},
           {"metrics", c.metrics},
           {"packet", {{"top_words", c.packet.top_words}, {"bios_per_cluster", c.packet.bios_per_cluster}}},
           {"out_dir", c.out_dir.generic_string()},
           {"deterministic", c.deterministic},
           {"threads", c.threads}};
    j["metrics"]["gmm_sigma"] = c.gmm_sigma;
    if (c.corpus_format) j["corpus_format"] = *c.corpus_format == CorpusFormat::csv ? "csv" : "ndjson";
    if (c.embed_service) j["embed_service"] = *c.embed_service;
    if (c.judge) {
        j["judge"] = *c.judge;
        j["judge"]["enabled"] = c.run_judge;
    }
    return j;
}

}  // namespace clustval
