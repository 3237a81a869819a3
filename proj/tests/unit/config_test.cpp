#include <doctest.h>

#include "oed/cli/config.hpp"
#include "synthetic.hpp"

using namespace oed;
using namespace oed::cli;
namespace fs = std::filesystem;

namespace {

std::string config_with(const std::string& extra, const std::string& variants) {
  return R"({"name": "t", "data": {"trainval": "d/tv.jsonl", "test": "d/te.jsonl"})" + extra +
         R"(, "variants": )" + variants + "}";
}

const std::string kOneRnn = R"([{"id": "a", "family": "rnn", "arch": "<5,2>", "features": "{B,S}"}])";

}  // namespace

TEST_CASE("seed lists") {
  CHECK(parse_seeds("1..5") == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  CHECK(parse_seeds("3") == std::vector<std::uint64_t>{3});
  CHECK(parse_seeds("[1,2,3]") == std::vector<std::uint64_t>{1, 2, 3});
  CHECK_THROWS_AS(parse_seeds("5..1"), ConfigError);
  CHECK_THROWS_AS(parse_seeds("a..b"), ConfigError);
  CHECK_THROWS_AS(parse_seeds(""), ConfigError);
}

TEST_CASE("a minimal config fills in defaults and resolves paths") {
  const auto cfg = parse_config(config_with("", kOneRnn), "/base");
  CHECK(cfg.name == "t");
  CHECK(cfg.trainval == fs::path("/base/d/tv.jsonl"));
  CHECK(cfg.seeds.size() == 10);
  CHECK(cfg.stop.patience == 400);
  CHECK(cfg.stop.max_epochs == 5000);
  REQUIRE(cfg.variants.size() == 1);
  const auto& r = std::get<models::RnnConfig>(cfg.variants[0].model);
  CHECK(r.hidden_units == std::vector<int>{5, 2});
  CHECK(r.features == "{B,S}");
  CHECK(default_output(cfg) == fs::path("out") / "t");
}

TEST_CASE("every family and top-level option parses") {
  const std::string variants = R"([
    {"id": "r", "family": "rnn", "hidden_units": [15], "dropout": 0.2, "batch_size": 8},
    {"id": "c", "family": "cnn", "window": 3, "features": "{W,Po}", "filters_per_size": 10},
    {"id": "s", "family": "svm", "kernel": "linear", "c": 2.0}])";
  const std::string extra = R"(, "seeds": "1..3", "patience": 5, "max_epochs": 9, "monitor": "sens-spec",
    "validation_fraction": 0.25, "fixed_split": true, "split_seed": 4, "jobs": 2, "output": "res",
    "providers": {"B": {"name": "hashed-context", "params": {"window": "3"}}})";
  const auto cfg = parse_config(config_with(extra, variants), "/x");
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(cfg.stop.patience == 5);
  CHECK(cfg.monitor == evalstats::F1Kind::kSensSpec);
  CHECK(cfg.fixed_split);
  CHECK(cfg.jobs == 2);
  CHECK(cfg.output == fs::path("/x/res"));
  CHECK(cfg.contextual.params.at("window") == "3");
  const auto& c = std::get<models::CnnConfig>(cfg.variants[1].model);
  CHECK(c.window == 3);
  CHECK_FALSE(c.use_entity);
  CHECK(c.filter_sizes == std::vector<int>{2, 3});
  CHECK(std::get<models::SvmConfig>(cfg.variants[2].model).c == 2.0);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(parse_config(config_with(R"(, "paitence": 3)", kOneRnn), "."), ConfigError);
  CHECK_THROWS_AS(parse_config(config_with("", R"([{"family": "rnn", "unitz": 3}])"), "."), ConfigError);
  CHECK_THROWS_AS(parse_config(config_with("", R"([{"family": "gru"}])"), "."), ConfigError);
  CHECK_THROWS_AS(parse_config(config_with(R"(, "patience": "ten")", kOneRnn), "."), ConfigError);
  CHECK_THROWS_AS(parse_config(config_with("", R"([{"family": "rnn", "features": "{Q}"}])"), "."), UsageError);
  CHECK_THROWS_AS(parse_config(config_with("", R"([{"family": "cnn", "window": 4}])"), "."), UsageError);
  CHECK_THROWS_AS(parse_config(config_with(R"(, "seeds": "1..0")", kOneRnn), "."), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"data": {"trainval": "a"}, "variants": [{"family": "rnn"}]})", "."), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json", "."), ConfigError);
  CHECK_THROWS_AS(parse_config(config_with("", "[]"), "."), UsageError);
}

TEST_CASE("the config hash follows the file bytes") {
  const auto a = parse_config(config_with("", kOneRnn), ".");
  const auto b = parse_config(config_with("", kOneRnn), ".");
  const auto c = parse_config(config_with(R"(, "patience": 3)", kOneRnn), ".");
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
  CHECK_FALSE(a.hash.empty());
}

TEST_CASE("load_config records its source") {
  oed::testing::TempDir dir;
  oed::testing::write_file(dir / "c.json", config_with("", kOneRnn));
  const auto cfg = load_config(dir / "c.json");
  CHECK(cfg.source == dir / "c.json");
  CHECK(cfg.test == dir / "d/te.jsonl");
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("shipped configs parse") {
  const auto dir = fs::path(OED_FIXTURE_DIR).parent_path() / "configs";
  const std::pair<const char*, std::size_t> files[] = {{"ablation.json", 7}, {"architectures.json", 3}, {"windows.json", 6}};
  for (const auto& [name, variants] : files) {
    INFO(name);
    const auto cfg = load_config(dir / name);
    CHECK(cfg.variants.size() == variants);
    CHECK(fs::exists(cfg.manifest));
    CHECK_NOTHROW(cfg.validate());
  }
}
