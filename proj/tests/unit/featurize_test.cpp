#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oed/featurize/cache.hpp"
#include "oed/featurize/encoder.hpp"
#include "oed/featurize/feature_kind.hpp"
#include "oed/featurize/featurizer.hpp"
#include "oed/featurize/tagger.hpp"
#include "oed/featurize/vocabulary.hpp"
#include "synthetic.hpp"

using namespace oed;
using namespace oed::featurize;
using oed::testing::make_sentence;
using oed::testing::TempDir;
using oed::testing::write_file;

namespace {

corpus::Dataset two_sentences() {
  corpus::Dataset d;
  d.sentences.push_back(make_sentence("a", {{"Protesters", 0}, {"clash", 1}, {"in", 0}, {"Lima", 0}, {".", 0}}));
  d.sentences.push_back(make_sentence("b", {{"Riots", 1}, {"spread", 0}, {".", 0}}));
  return d;
}

double cosine(const Eigen::RowVectorXf& a, const Eigen::RowVectorXf& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("feature expressions") {
  CHECK(parse_feature_expr("all") == FeatureSet::all());
  CHECK(FeatureSet::all().size() == 8);
  CHECK_FALSE(FeatureSet::all().contains(FeatureKind::Po));
  CHECK(concat_dim(parse_feature_expr("all")) == 1972);
  CHECK(concat_dim(parse_feature_expr("all-{B}")) == 1972 - 768);
  CHECK(concat_dim(parse_feature_expr("all-{W,P,T,D,E}")) == 768 + 768 + 96);
  CHECK(parse_feature_expr("{B,S}") == FeatureSet{FeatureKind::B, FeatureKind::S});
  CHECK(parse_feature_expr("{S,B}").to_string() == "{B,S}");
  CHECK(parse_feature_expr("all-{Sp}").to_string() == "{W,P,T,D,E,B,S}");
  CHECK(concat_dim(FeatureSet{FeatureKind::W, FeatureKind::Po}, 50) == 350);

  CHECK_THROWS_AS(parse_feature_expr("{X}"), FeatureExprError);
  CHECK_THROWS_AS(parse_feature_expr("{}"), FeatureExprError);
  CHECK_THROWS_AS(parse_feature_expr("all-{W,P,T,D,E,Sp,B,S}"), FeatureExprError);
  CHECK_THROWS_AS(parse_feature_expr("some"), FeatureExprError);
  CHECK_THROWS_AS(parse_feature_expr("{B,S"), FeatureExprError);

  for (auto k : kAllKinds) CHECK(kind_from_string(to_string(k)) == k);
  CHECK_FALSE(kind_from_string("Q"));
}

TEST_CASE("feature sets behave as sets") {
  const FeatureSet a{FeatureKind::W, FeatureKind::B};
  const FeatureSet b{FeatureKind::B, FeatureKind::S};
  CHECK((a | b).size() == 3);
  CHECK((a & b) == FeatureSet{FeatureKind::B});
  CHECK((a - b) == FeatureSet{FeatureKind::W});
  CHECK(FeatureSet{}.empty());
  const auto kinds = FeatureSet::all().kinds();
  CHECK(kinds.front() == FeatureKind::W);
  CHECK(kinds.back() == FeatureKind::S);
}

TEST_CASE("vocabulary reserves padding and unknown rows") {
  Vocabulary v({"b", "a", "c", "a"});
  CHECK(v.size() == 5);
  CHECK(v.entry_count() == 3);
  CHECK(v.index("a") == 2);
  CHECK(v.index("c") == 4);
  CHECK(v.index("zzz") == Vocabulary::kUnknown);

  TempDir dir;
  v.save(dir / "v.txt");
  CHECK(Vocabulary::load(dir / "v.txt") == v);
}

TEST_CASE("tag vocabularies do not depend on sentence order") {
  auto d = two_sentences();
  const auto a = build_tag_vocab(d, FeatureKind::P);
  std::swap(d.sentences[0], d.sentences[1]);
  const auto b = build_tag_vocab(d, FeatureKind::P);
  CHECK(a.vocab == b.vocab);
  CHECK(a.size() == 4 + Vocabulary::kReserved);  // PROPN NOUN X PUNCT
  CHECK_THROWS_AS(build_tag_vocab(d, FeatureKind::B), UsageError);
}

TEST_CASE("word table starts from pretrained rows") {
  TempDir dir;
  write_file(dir / "vec.txt", "2 3\nclash 1 2 3\nLima 0.5 0.5 0.5\n");
  const auto pre = StaticEmbeddings::load_text(dir / "vec.txt", 3);
  CHECK(pre.size() == 2);
  REQUIRE(pre.find("clash"));
  CHECK((*pre.find("clash"))[2] == 3.0f);

  const auto d = two_sentences();
  const corpus::Dataset* parts[] = {&d};
  const auto words = build_word_embeddings(parts, &pre, 3);
  const auto table = words.initial_table(5);
  CHECK(table.rows() == static_cast<Eigen::Index>(words.vocab.size()));
  CHECK(table.row(Vocabulary::kPad).norm() == 0.0);
  const int clash = words.vocab.index("clash");
  CHECK(table(clash, 0) == 1.0);
  CHECK(table(clash, 2) == 3.0);
  const int riots = words.vocab.index("Riots");
  CHECK(table.row(riots).cwiseAbs().maxCoeff() <= 0.25);
  CHECK(table == words.initial_table(5));
  CHECK(table != words.initial_table(6));

  write_file(dir / "bad.txt", "clash 1 2\n");
  CHECK_THROWS(StaticEmbeddings::load_text(dir / "bad.txt", 3));
}

TEST_CASE("subword alignment averages pieces") {
  TokenMatrix pieces(3, 2);
  pieces << 1, 2, 3, 4, 10, 20;
  const int owner[] = {0, 0, 1};
  const auto out = align_subwords(pieces, owner, 2);
  CHECK(out(0, 0) == 2.0f);
  CHECK(out(0, 1) == 3.0f);
  CHECK(out(1, 1) == 20.0f);
  const int gap[] = {0, 0, 2};
  CHECK_THROWS_AS(align_subwords(pieces, gap, 3), FeatureError);
}

TEST_CASE("sentence embedding is the elementwise sum") {
  TokenMatrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  CHECK(sentence_embedding(m) == std::vector<float>{5, 7, 9});
  CHECK_THROWS_AS(sentence_embedding(TokenMatrix(0, 3)), FeatureError);
  std::vector<std::vector<float>> mixed{{1, 2}, {1}};
  CHECK_THROWS_AS(sentence_embedding(mixed), FeatureError);
}

TEST_CASE("hashed encoder is deterministic and context sensitive") {
  HashedContextEncoder enc({});
  CHECK(enc.pieces("Protesters") == std::vector<std::string>{"prot", "este", "rs"});
  const auto d = two_sentences();
  const auto a = enc.encode(d.sentences[0]);
  CHECK(a.rows() == 5);
  CHECK(a.cols() == 768);
  CHECK(a == enc.encode(d.sentences[0]));

  // Same word, different neighbours.
  const auto s1 = make_sentence("x", {{"crisis", 0}, {"deepens", 0}});
  const auto s2 = make_sentence("y", {{"old", 0}, {"crisis", 0}});
  const Eigen::RowVectorXf v1 = enc.encode(s1).row(0);
  const Eigen::RowVectorXf v2 = enc.encode(s2).row(1);
  CHECK(v1 != v2);
  CHECK(cosine(v1, v2) > 0.3);

  // Words sharing a leading piece are closer than unrelated ones.
  const auto m = enc.encode(make_sentence("z", {{"ongoabcd", 0}, {"x", 0}, {"y", 0}, {"z", 0}, {"ongowxyz", 0},
                                                {"q", 0}, {"r", 0}, {"s", 0}, {"pastwxyz", 0}}));
  CHECK(cosine(m.row(0), m.row(4)) > cosine(m.row(0), m.row(8)) + 0.2);

  HashedContextEncoder::Options salted;
  salted.salt = 3;
  CHECK(HashedContextEncoder(salted).name() != enc.name());
}

TEST_CASE("precomputed encoder aligns pieces to tokens") {
  TempDir dir;
  write_file(dir / "pre.jsonl",
             R"({"id":"b","piece_token":[0,0,1,2],"pieces":[[1,1],[3,3],[5,6],[7,8]]})" "\n");
  PrecomputedEncoder enc(dir / "pre.jsonl", 2);
  const auto d = two_sentences();
  const auto m = enc.encode(d.sentences[1]);
  CHECK(m(0, 0) == 2.0f);
  CHECK(m(1, 1) == 6.0f);
  CHECK_THROWS_AS(enc.encode(d.sentences[0]), FeatureError);
}

TEST_CASE("featurized bundles carry each requested kind") {
  const auto d = two_sentences();
  const corpus::Dataset* parts[] = {&d};
  Featurizer f(build_context(parts), oed::testing::hashed_providers());
  const auto fs = f.featurize(d.sentences[0], parse_feature_expr("all") | FeatureSet{FeatureKind::Po});
  REQUIRE(fs.size() == 5);
  CHECK(fs.labels == std::vector<int>{0, 1, 0, 0, 0});
  for (std::size_t t = 0; t < fs.size(); ++t) {
    const auto& b = fs.tokens[t];
    CHECK(b.vectors.at(FeatureKind::B).size() == 768);
    CHECK(b.vectors.at(FeatureKind::S).size() == 768);
    CHECK(b.vectors.at(FeatureKind::Sp).size() == 96);
    CHECK(b.indices.at(FeatureKind::Po) == static_cast<int>(t));
    CHECK(b.indices.at(FeatureKind::W) >= static_cast<int>(Vocabulary::kReserved));
    CHECK(b.vectors.at(FeatureKind::S) == fs.tokens[0].vectors.at(FeatureKind::S));
  }
  // S oracle: add the B rows by hand.
  for (std::size_t k = 0; k < 768; k += 97) {
    double sum = 0;
    for (const auto& b : fs.tokens) sum += b.vectors.at(FeatureKind::B)[k];
    CHECK(fs.tokens[0].vectors.at(FeatureKind::S)[k] == doctest::Approx(sum).epsilon(1e-5));
  }

  Featurizer bare(build_context(parts), {});
  CHECK_THROWS_AS(bare.featurize(d.sentences[0], {FeatureKind::B}), FeatureError);
  CHECK_NOTHROW(bare.featurize(d.sentences[0], {FeatureKind::W, FeatureKind::E}));

  ProviderRegistry wrong;
  wrong[FeatureKind::B] = std::make_shared<HashedContextEncoder>(HashedContextEncoder::Options{96});
  CHECK_THROWS_AS(Featurizer(build_context(parts), wrong), FeatureError);
}

TEST_CASE("feature cache round-trips and ignores stale shapes") {
  TempDir dir;
  FeatureCache cache(dir.path());
  TokenMatrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  cache.store("enc", "s/1", m);
  CHECK(std::filesystem::exists(cache.path_for("enc", "s/1")));
  CHECK(cache.path_for("enc", "s/1").filename() == "s%2F1.bin");
  const auto hit = cache.load("enc", "s/1", 2, 3);
  REQUIRE(hit);
  CHECK(*hit == m);
  CHECK_FALSE(cache.load("enc", "s/1", 3, 3));
  CHECK_FALSE(cache.load("enc", "other", 2, 3));
  CHECK(FeatureCache::escape("..") == "%2E.");
}

TEST_CASE("cached features equal freshly computed ones") {
  TempDir dir;
  const auto d = two_sentences();
  const corpus::Dataset* parts[] = {&d};
  const auto kinds = FeatureSet{FeatureKind::B, FeatureKind::S, FeatureKind::Sp};
  auto cache = std::make_shared<FeatureCache>(dir.path());
  Featurizer cold(build_context(parts), oed::testing::hashed_providers(), cache);
  const auto first = cold.featurize(d, kinds);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path())) files += e.is_regular_file();
  CHECK(files == 4);
  const auto second = cold.featurize(d, kinds);
  Featurizer plain(build_context(parts), oed::testing::hashed_providers());
  CHECK(first == second);
  CHECK(first == plain.featurize(d, kinds));
}

TEST_CASE("column files feed the tagger") {
  TempDir dir;
  write_file(dir / "tagged.tsv",
             "# id = s1\n# date = 1998-08-17\nRussia\tPROPN\tNNP\tnsubj\tB-GPE\t0\ndefaults\tVERB\tVBZ\tROOT\tO\t1\n\n"
             "Prices\tNOUN\tNNS\tnsubj\tO\nrise\tVERB\tVBP\tROOT\tO\n");
  const auto d = read_tagged_columns(dir / "tagged.tsv");
  REQUIRE(d.size() == 2);
  CHECK(d.sentences[0].id == "s1");
  CHECK(d.sentences[0].tokens[1].is_trigger());
  CHECK(d.sentences[1].id == "tagged-2");
  CHECK(d.sentences[1].tokens[0].pos_detailed == "NNS");

  ColumnFileTagger tagger(dir / "tagged.tsv");
  auto s = make_sentence("s1", {{"Russia", 0}, {"defaults", 1}});
  tagger.annotate(s);
  CHECK(s.tokens[0].entity_tag == "B-GPE");
  CHECK(s.tokens[1].dep_rel == "ROOT");
  auto mismatch = make_sentence("s1", {{"Russia", 0}, {"pays", 0}});
  CHECK_THROWS(tagger.annotate(mismatch));
  auto unknown = make_sentence("s9", {{"x", 0}});
  CHECK_THROWS(tagger.annotate(unknown));
}
