#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>

#include "qlinsolve/reference_data.hpp"

using namespace qls;

namespace {

struct ManifestRow {
  double value;
  std::string source;
};

std::map<std::string, ManifestRow> read_manifest() {
  std::ifstream in(QLS_MANIFEST);
  EXPECT_TRUE(in.good()) << QLS_MANIFEST;
  std::map<std::string, ManifestRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    EXPECT_NE(t2, std::string::npos) << line;
    rows[line.substr(0, t1)] = {std::stod(line.substr(t1 + 1, t2 - t1 - 1)), line.substr(t2 + 1)};
  }
  return rows;
}

}  // namespace

TEST(ConstantsAudit, EveryConstantInManifest) {
  const auto manifest = read_manifest();
  std::set<std::string> keys;
  for (const auto& c : reference::constants()) {
    const std::string key(c.key);
    EXPECT_TRUE(keys.insert(key).second) << "duplicate " << key;
    EXPECT_FALSE(c.provenance.empty()) << key;
    auto it = manifest.find(key);
    ASSERT_NE(it, manifest.end()) << key << " missing from manifest";
    EXPECT_EQ(it->second.value, c.value) << key;
    EXPECT_EQ(it->second.source, std::string(c.provenance)) << key;
  }
  EXPECT_EQ(keys.size(), manifest.size());
}

TEST(ConstantsAudit, Lookup) {
  EXPECT_EQ(reference::get("ex1.thm1.alpha"), 0.98);
  EXPECT_EQ(reference::get("ex4.table.K", 3), 90);
  EXPECT_THROW(reference::get("nope"), Error);
  EXPECT_FALSE(reference::find("nope").has_value());
  EXPECT_THROW(reference::builtin_problem("ex7"), Error);
  EXPECT_THROW(reference::builtin_graph("ring"), Error);
}

TEST(ConstantsAudit, EmbeddedSystems) {
  const auto p1 = reference::example1_problem();
  EXPECT_EQ(p1.H(2, 1), -0.7);
  EXPECT_EQ(p1.z(3), 1.5);
  const auto p4 = reference::example4_problem();
  EXPECT_EQ(p4.H(4, 1), -1.6668);
  EXPECT_EQ(p4.z(0), -0.2854);
  // The stated exact solution fits the first system.
  const Vector y = Eigen::Vector2d(reference::get("ex1.y.1"), reference::get("ex1.y.2"));
  EXPECT_LT((p1.H * y - p1.z).cwiseAbs().maxCoeff(), 1e-14);
}
