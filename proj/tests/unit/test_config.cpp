#include <doctest.h>

#include <cstdlib>

#include "clustval/config.hpp"
#include "clustval/error.hpp"
#include "support.hpp"

using namespace clustval;
using testsupport::TempDir;
using testsupport::write_text;

TEST_CASE("JSON pipeline config with relative paths") {
    TempDir dir;
    write_text(dir / "p.json", R"({
        "corpus": "bios.ndjson", "embeddings": "emb.ndjson",
        "models": ["gmm", "random"], "k": 4, "seed": 11, "seeds": {"random": 99},
        "lda": {"sweeps": 50, "burn_in": 10},
        "metrics": {"metric": "euclidean", "reference": "whole", "gmm_sigma": false},
        "packet": {"top_words": 8, "bios_per_cluster": 12},
        "out_dir": "out", "deterministic": true
    })");
    auto c = load_pipeline_config(dir / "p.json");
    CHECK(c.corpus == dir.path() / "bios.ndjson");
    CHECK(*c.embeddings == dir.path() / "emb.ndjson");
    CHECK(c.models == std::vector<ModelTag>{ModelTag::gmm, ModelTag::random});
    CHECK(c.k == 4);
    CHECK(c.lda.sweeps == 50);
    CHECK(c.lda.sample_lag == LdaConfig{}.sample_lag);
    CHECK(c.metrics.metric == DistanceMetric::euclidean);
    CHECK(c.metrics.reference == KeynessReference::whole);
    CHECK_FALSE(c.gmm_sigma);
    CHECK(c.packet.top_words == 8);
    CHECK(c.out_dir == dir.path() / "out");
    CHECK(c.deterministic);
    CHECK(c.model_seed(ModelTag::random) == 99);
    CHECK(c.model_seed(ModelTag::gmm) != c.model_seed(ModelTag::lda));
    c.validate();

    auto again = pipeline_config_from_json(to_json(c));
    CHECK(to_json(again) == to_json(c));
}

TEST_CASE("TOML config reads the same as JSON") {
    TempDir dir;
    write_text(dir / "p.toml", R"(corpus = "/data/bios.csv"
models = ["lda"]
k = 6
seed = 3

[lda]
sweeps = 40
burn_in = 20
sample_lag = 5
)");
    write_text(dir / "p.json", R"({"corpus": "/data/bios.csv", "models": ["lda"], "k": 6, "seed": 3,
        "lda": {"sweeps": 40, "burn_in": 20, "sample_lag": 5}})");
    auto t = load_pipeline_config(dir / "p.toml");
    auto j = load_pipeline_config(dir / "p.json");
    CHECK(to_json(t) == to_json(j));
    CHECK(load_config_document(dir / "p.toml")["lda"]["sweeps"] == 40);
    write_text(dir / "bad.toml", "k = [\n");
    CHECK_THROWS_AS(load_config_document(dir / "bad.toml"), Error);
}

TEST_CASE("API keys come from the environment") {
    ::setenv("EMBED_API_KEY", "emb-key", 1);
    ::setenv("JUDGE_API_KEY", "judge-key", 1);
    auto c = pipeline_config_from_json(nlohmann::json::parse(R"({"corpus": "c.ndjson",
        "embed_service": {"api_base": "http://localhost:1/v1", "model": "e"},
        "judge": {"api_base": "http://localhost:1/v1", "enabled": true, "repetitions": 3}})"));
    CHECK(c.embed_service->endpoint.bearer_token == "emb-key");
    CHECK(c.judge->endpoint.bearer_token == "judge-key");
    CHECK(c.judge->repetitions == 3);
    CHECK(c.run_judge);
    // Keys are never written back out.
    CHECK(to_json(c).dump().find("emb-key") == std::string::npos);
    CHECK(to_json(c).dump().find("judge-key") == std::string::npos);
    ::unsetenv("EMBED_API_KEY");
    ::unsetenv("JUDGE_API_KEY");
}

TEST_CASE("invalid configs") {
    CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::array()), Error);
    CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json{{"corpus", "c"}, {"models", {"kmeans"}}}), Error);
    CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json{{"corpus", 5}}), Error);
    PipelineConfig c;
    CHECK_THROWS_AS(c.validate(), Error);
    c.corpus = "x.ndjson";
    c.k = 1;
    CHECK_THROWS_AS(c.validate(), Error);
    c.k = 3;
    c.models.clear();
    CHECK_THROWS_AS(c.validate(), Error);
    c.models = {ModelTag::random};
    c.run_judge = true;
    CHECK_THROWS_AS(c.validate(), Error);
}
