#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <sstream>

#include <json.hpp>

#include "trajad/errors.hpp"
#include "trajad/weights.hpp"

namespace trajad {
namespace {

const PredictorConfig kSmall{3, 2, 4, 2, 1};

struct Split {
  std::string prefix;  // magic + version
  nlohmann::json manifest;
  std::string payload;
};

Split split(const std::string& bytes) {
  const std::size_t nl = bytes.find('\n');
  return {bytes.substr(0, 5), nlohmann::json::parse(bytes.substr(5, nl - 5)),
          bytes.substr(nl + 1)};
}

std::string join(const Split& s) { return s.prefix + s.manifest.dump() + "\n" + s.payload; }

TEST(Layout, TensorNamesAndShapes) {
  const auto layout = bitrap_layout(kSmall);
  ASSERT_FALSE(layout.empty());
  EXPECT_EQ(layout.front().name, "enc.embed.weight");
  EXPECT_EQ(layout.front().shape, (std::vector<std::size_t>{4, 6}));
  const auto find = [&](const std::string& name) {
    for (const auto& t : layout) {
      if (t.name == name) return t.shape;
    }
    return std::vector<std::size_t>{};
  };
  EXPECT_EQ(find("enc.gru.weight_ih"), (std::vector<std::size_t>{12, 4}));
  EXPECT_EQ(find("prior.head.weight"), (std::vector<std::size_t>{4, 4}));
  EXPECT_EQ(find("goal.fc1.weight"), (std::vector<std::size_t>{4, 6}));
  EXPECT_EQ(find("goal.head.bias"), (std::vector<std::size_t>{4}));
  EXPECT_EQ(find("dec.bwd_in.weight"), (std::vector<std::size_t>{4, 4}));
  EXPECT_EQ(find("dec.out.weight"), (std::vector<std::size_t>{4, 8}));
}

TEST(Container, ByteLayout) {
  const auto w = make_weights(kSmall, {{"goal.head.bias", {1.0F, -2.0F, 0.5F, 0.0F}}});
  const std::string bytes = w.save_to_string();
  ASSERT_GE(bytes.size(), 5u);
  EXPECT_EQ(bytes.substr(0, 4), "BTLW");
  EXPECT_EQ(bytes[4], '\x01');
  const Split s = split(bytes);
  EXPECT_EQ(s.manifest.at("config").at("hidden"), 4);
  EXPECT_EQ(s.manifest.at("config").at("latent"), 2);
  EXPECT_EQ(s.payload.size(), w.payload().size() * 4);
  const TensorView goal = w.tensor("goal.head.bias");
  const std::size_t offset =
      static_cast<std::size_t>(goal.values.data() - w.payload().data()) * 4;
  const unsigned char expected[4] = {0x00, 0x00, 0x00, 0xC0};  // -2.0f little-endian
  EXPECT_EQ(std::memcmp(s.payload.data() + offset + 4, expected, 4), 0);
}

TEST(Container, RoundTripIsBitIdentical) {
  const auto w = random_weights(kSmall, 42);
  const std::string bytes = w.save_to_string();
  const auto loaded = WeightContainer::load(bytes);
  EXPECT_EQ(loaded.config(), w.config());
  EXPECT_EQ(loaded.manifest(), w.manifest());
  ASSERT_EQ(loaded.payload().size(), w.payload().size());
  for (std::size_t k = 0; k < w.payload().size(); ++k) {
    ASSERT_EQ(std::bit_cast<std::uint32_t>(loaded.payload()[k]),
              std::bit_cast<std::uint32_t>(w.payload()[k]));
  }
  EXPECT_EQ(loaded.save_to_string(), bytes);
  std::istringstream in(bytes);
  EXPECT_EQ(WeightContainer::load(in).save_to_string(), bytes);
}

TEST(Container, RejectsTruncatedAndTrailingPayload) {
  const std::string bytes = random_weights(kSmall, 1).save_to_string();
  EXPECT_THROW(WeightContainer::load(bytes.substr(0, bytes.size() - 4)), WeightError);
  EXPECT_THROW(WeightContainer::load(bytes.substr(0, bytes.size() - 1)), WeightError);
  EXPECT_THROW(WeightContainer::load(bytes + std::string(4, '\0')), WeightError);
}

TEST(Container, RejectsReorderedManifest) {
  Split s = split(random_weights(kSmall, 2).save_to_string());
  auto& tensors = s.manifest.at("tensors");
  // prior.fc1 and prior.fc2 have identical shapes, so only order tells them apart.
  std::size_t fc1 = 0, fc2 = 0;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    if (tensors[k].at("name") == "prior.fc1.weight") fc1 = k;
    if (tensors[k].at("name") == "prior.fc2.weight") fc2 = k;
  }
  std::swap(tensors[fc1], tensors[fc2]);
  EXPECT_THROW(WeightContainer::load(join(s)), WeightError);
}

TEST(Container, RejectsManifestErrors) {
  const std::string good = random_weights(kSmall, 3).save_to_string();
  {
    Split s = split(good);
    s.manifest["tensors"][0]["name"] = "enc.embedding.weight";
    EXPECT_THROW(WeightContainer::load(join(s)), WeightError);
  }
  {
    Split s = split(good);
    s.manifest["tensors"][1] = s.manifest["tensors"][0];
    EXPECT_THROW(WeightContainer::load(join(s)), WeightError);
  }
  {
    Split s = split(good);
    s.manifest["tensors"].erase(s.manifest["tensors"].size() - 1);
    EXPECT_THROW(WeightContainer::load(join(s)), WeightError);
  }
  {
    Split s = split(good);
    s.manifest["tensors"][0]["shape"] = {6, 4};
    EXPECT_THROW(WeightContainer::load(join(s)), WeightError);
  }
  {
    Split s = split(good);
    s.manifest["config"]["hidden"] = 5;
    EXPECT_THROW(WeightContainer::load(join(s)), WeightError);
  }
  EXPECT_THROW(WeightContainer::load("BTLX" + good.substr(4)), WeightError);
  EXPECT_THROW(WeightContainer::load(good.substr(0, 4) + '\x02' + good.substr(5)), WeightError);
  EXPECT_THROW(WeightContainer::load(good.substr(0, 20)), WeightError);
  EXPECT_THROW(WeightContainer::load("BTLW\x01{not json\n"), WeightError);
}

TEST(Container, TamperedPayloadLoadsDifferentValues) {
  std::string bytes = random_weights(kSmall, 4).save_to_string();
  const auto original = WeightContainer::load(bytes);
  bytes[bytes.size() - 2] = static_cast<char>(bytes[bytes.size() - 2] ^ 0x40);
  const auto tampered = WeightContainer::load(bytes);
  EXPECT_NE(original.payload().back(), tampered.payload().back());
}

TEST(Container, ConstructionAndLookup) {
  EXPECT_THROW(make_weights(kSmall, {{"nope", {1.0F}}}), WeightError);
  EXPECT_THROW(make_weights(kSmall, {{"goal.head.bias", {1.0F}}}), WeightError);
  EXPECT_THROW(zero_weights(kSmall).tensor("nope"), WeightError);
  EXPECT_THROW(validate(PredictorConfig{3, 3, 0, 2, 1}), ConfigError);
  EXPECT_THROW(validate(PredictorConfig{3, 3, 4, 2, 2}), ConfigError);
  const auto w = zero_weights(kSmall);
  for (const float v : w.payload()) EXPECT_EQ(v, 0.0F);
  EXPECT_EQ(random_weights(kSmall, 9).save_to_string(), random_weights(kSmall, 9).save_to_string());
  EXPECT_NE(random_weights(kSmall, 9).save_to_string(), random_weights(kSmall, 10).save_to_string());
}

}  // namespace
}  // namespace trajad
