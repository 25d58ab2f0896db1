#include <charconv>
#include <fstream>
#include <sstream>

#include "qprof/forest.hpp"

namespace qprof {
namespace {

constexpr std::string_view kMagic = "qprof-forest";
constexpr int kFormatVersion = 1;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string encode_mask(const std::vector<bool>& mask) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out((mask.size() + 3) / 4, '0');
  for (std::size_t d = 0; d < out.size(); ++d) {
    unsigned nibble = 0;
    for (std::size_t b = 0; b < 4 && d * 4 + b < mask.size(); ++b)
      if (mask[d * 4 + b]) nibble |= 1u << b;
    out[d] = kHex[nibble];
  }
  return out;
}

/// Line-oriented tokenizer that remembers where it is for diagnostics.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::vector<std::string> next_line() {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of model file");
    ++line_no_;
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(std::move(t));
    return tokens;
  }

  std::vector<std::string> expect(std::string_view keyword, std::size_t args) {
    auto tokens = next_line();
    if (tokens.empty() || tokens[0] != keyword)
      fail("expected '" + std::string(keyword) + "'");
    if (tokens.size() != args + 1)
      fail("'" + std::string(keyword) + "' takes " + std::to_string(args) +
           " value(s)");
    return tokens;
  }

  template <typename T>
  T number(const std::string& token) const {
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
      fail("bad number '" + token + "'");
    return value;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(line_no_, what);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::vector<bool> decode_mask(const Reader& r, const std::string& hex,
                              std::size_t n) {
  if (hex.size() != (n + 3) / 4) r.fail("OOB mask has wrong length");
  std::vector<bool> mask(n, false);
  for (std::size_t d = 0; d < hex.size(); ++d) {
    const char c = hex[d];
    unsigned nibble;
    if (c >= '0' && c <= '9') nibble = unsigned(c - '0');
    else if (c >= 'a' && c <= 'f') nibble = unsigned(c - 'a' + 10);
    else r.fail("bad hex digit in OOB mask");
    for (std::size_t b = 0; b < 4; ++b) {
      const bool bit = (nibble >> b) & 1u;
      if (d * 4 + b < n) mask[d * 4 + b] = bit;
      else if (bit) r.fail("OOB mask has bits past the sample count");
    }
  }
  return mask;
}

}  // namespace

void serialize(const Forest& forest, std::ostream& out) {
  for (const std::string& c : forest.classes) {
    if (c.empty() || c.find_first_of(" \t\r\n") != std::string::npos)
      throw InvalidArgument("class names must be non-empty without whitespace");
  }
  const ForestParams& p = forest.params;
  out << kMagic << ' ' << kFormatVersion << '\n'
      << "trees " << forest.trees.size() << '\n'
      << "mtry " << p.mtry.value_or(0) << '\n'
      << "min_node_size " << p.min_node_size << '\n'
      << "max_depth " << p.max_depth.value_or(0) << '\n'
      << "seed " << p.seed << '\n'
      << "features " << forest.n_features << '\n'
      << "samples " << forest.n_samples() << '\n'
      << "classes " << forest.classes.size();
  for (const std::string& c : forest.classes) out << ' ' << c;
  out << '\n';
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const DecisionTree& tree = forest.trees[t];
    out << "tree " << t << ' ' << tree.nodes().size() << '\n'
        << "oob " << encode_mask(forest.oob_masks[t]) << '\n';
    for (const TreeNode& n : tree.nodes()) {
      if (n.is_leaf()) {
        out << 'L';
        for (auto c : tree.leaf_counts(static_cast<std::size_t>(n.left)))
          out << ' ' << c;
      } else {
        out << "S " << n.feature << ' ' << format_double(n.threshold) << ' '
            << n.left << ' ' << n.right;
      }
      out << '\n';
    }
  }
  out << "end\n";
}

std::string serialize(const Forest& forest) {
  std::ostringstream out;
  serialize(forest, out);
  return out.str();
}

Forest deserialize(std::istream& in) {
  Reader r(in);
  auto head = r.expect(kMagic, 1);
  if (r.number<int>(head[1]) != kFormatVersion)
    r.fail("unsupported model format version " + head[1]);

  Forest forest;
  const auto n_trees = r.number<int>(r.expect("trees", 1)[1]);
  const auto mtry = r.number<int>(r.expect("mtry", 1)[1]);
  const auto min_node = r.number<int>(r.expect("min_node_size", 1)[1]);
  const auto max_depth = r.number<int>(r.expect("max_depth", 1)[1]);
  const auto seed = r.number<std::uint64_t>(r.expect("seed", 1)[1]);
  const auto m = r.number<Eigen::Index>(r.expect("features", 1)[1]);
  const auto n = r.number<std::size_t>(r.expect("samples", 1)[1]);
  if (n_trees < 1) r.fail("model has no trees");
  if (m < 1 || mtry < 1 || mtry > m) r.fail("inconsistent feature count or mtry");
  if (min_node < 1 || max_depth < 0) r.fail("invalid tree size limits");
  forest.params.n_trees = n_trees;
  forest.params.mtry = mtry;
  forest.params.min_node_size = min_node;
  if (max_depth > 0) forest.params.max_depth = max_depth;
  forest.params.seed = seed;
  forest.n_features = m;

  auto cls = r.next_line();
  if (cls.size() < 2 || cls[0] != "classes") r.fail("expected 'classes'");
  const auto k = r.number<std::size_t>(cls[1]);
  if (k < 2 || cls.size() != k + 2) r.fail("class list does not match its count");
  forest.classes.assign(cls.begin() + 2, cls.end());

  for (int t = 0; t < n_trees; ++t) {
    auto th = r.expect("tree", 2);
    if (r.number<int>(th[1]) != t) r.fail("trees out of order");
    const auto count = r.number<std::size_t>(th[2]);
    if (count < 1) r.fail("tree has no nodes");
    forest.oob_masks.push_back(decode_mask(r, r.expect("oob", 1)[1], n));

    std::vector<TreeNode> nodes(count);
    std::vector<std::uint32_t> counts;
    std::vector<char> referenced(count, 0);
    std::int32_t leaves = 0;
    for (std::size_t i = 0; i < count; ++i) {
      auto tok = r.next_line();
      if (tok.size() == k + 1 && tok[0] == "L") {
        nodes[i] = TreeNode{-1, 0.0, leaves++, -1};
        for (std::size_t c = 0; c < k; ++c)
          counts.push_back(r.number<std::uint32_t>(tok[c + 1]));
      } else if (tok.size() == 5 && tok[0] == "S") {
        TreeNode node{r.number<std::int32_t>(tok[1]), r.number<double>(tok[2]),
                      r.number<std::int32_t>(tok[3]), r.number<std::int32_t>(tok[4])};
        if (node.feature < 0 || node.feature >= m) r.fail("split feature out of range");
        for (std::int32_t child : {node.left, node.right}) {
          // Children after their parent keeps the structure acyclic.
          if (child <= static_cast<std::int32_t>(i) ||
              child >= static_cast<std::int32_t>(count) || referenced[child]++)
            r.fail("invalid child index " + std::to_string(child));
        }
        nodes[i] = node;
      } else {
        r.fail("malformed tree node");
      }
    }
    for (std::size_t i = 1; i < count; ++i)
      if (!referenced[i]) r.fail("unreachable node " + std::to_string(i));
    forest.trees.emplace_back(std::move(nodes), std::move(counts),
                              static_cast<int>(k));
  }
  if (r.next_line() != std::vector<std::string>{"end"}) r.fail("expected 'end'");
  return forest;
}

Forest deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  return deserialize(in);
}

void save_model(const Forest& forest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  serialize(forest, out);
  if (!out) throw Error("write failed: " + path.string());
}

Forest load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return deserialize(in);
}

}  // namespace qprof
