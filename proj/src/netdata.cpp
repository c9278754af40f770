#include "dlfrm/netdata.hpp"

#include "dlfrm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_set>

namespace dlfrm {
namespace {

std::uint64_t pair_key(int src, int dst) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
         static_cast<std::uint32_t>(dst);
}

std::unordered_set<std::uint64_t> positive_pairs(const Network &net) {
  std::unordered_set<std::uint64_t> out;
  for (const auto &l : net.links)
    if (l.sign > 0 && l.src != l.dst)
      out.insert(pair_key(l.src, l.dst));
  return out;
}

// floor((1 - frac) * total) without the 0.2 * 100 = 19.999... trap.
std::size_t held_out_count(double frac, std::size_t total) {
  return static_cast<std::size_t>(
      std::floor((1.0 - frac) * static_cast<double>(total) + 1e-9));
}

bool parse_int(const std::string &tok, long long &out) {
  try {
    std::size_t pos = 0;
    out = std::stoll(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception &) {
    return false;
  }
}

} // namespace

bool Network::has_relations() const {
  return std::any_of(links.begin(), links.end(),
                     [](const Link &l) { return l.relation >= 0; });
}

std::size_t Network::positive_count() const {
  return static_cast<std::size_t>(std::count_if(
      links.begin(), links.end(), [](const Link &l) { return l.sign > 0; }));
}

Network load_edge_list(const std::filesystem::path &path,
                       std::optional<int> n_entities, bool symmetrize) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open edge list " + path.string());

  std::vector<Link> raw;
  long long max_id = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;)
      toks.push_back(t);
    if (toks.empty())
      continue;
    if (toks.size() < 2 || toks.size() > 3)
      throw ParseError("expected `src dst [relation]` in " + path.string(),
                       lineno);
    long long v[3] = {0, 0, -1};
    for (std::size_t t = 0; t < toks.size(); ++t) {
      if (!parse_int(toks[t], v[t]) || v[t] < 0 || v[t] > 0x7fffffff)
        throw ParseError("invalid id `" + toks[t] + "` in " + path.string(),
                         lineno);
    }
    if (n_entities && (v[0] >= *n_entities || v[1] >= *n_entities))
      throw RangeError("entity id out of range on line " +
                       std::to_string(lineno) + " (N = " +
                       std::to_string(*n_entities) + ")");
    max_id = std::max({max_id, v[0], v[1]});
    raw.push_back({static_cast<int>(v[0]), static_cast<int>(v[1]), 1,
                   static_cast<int>(v[2])});
  }

  Network net;
  net.n_entities = n_entities ? *n_entities : static_cast<int>(max_id + 1);
  std::set<std::tuple<int, int, int>> seen;
  auto add = [&](int s, int d, int r) {
    if (seen.emplace(s, d, r).second)
      net.links.push_back({s, d, 1, r});
  };
  for (const auto &l : raw) {
    add(l.src, l.dst, l.relation);
    if (symmetrize)
      add(l.dst, l.src, l.relation);
  }
  return net;
}

LinkSplit split_dense(const Network &net, double train_frac, RngStream &rng) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw ParameterError("train fraction must lie in (0, 1)");
  if (net.positive_count() == 0)
    throw UsageError("dense split needs at least one positive link");
  const auto positives = positive_pairs(net);

  std::vector<Observation> universe;
  const int n = net.n_entities;
  universe.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        universe.push_back({i, j, positives.count(pair_key(i, j)) ? 1 : -1});
  std::shuffle(universe.begin(), universe.end(), rng.engine());

  const std::size_t n_test = held_out_count(train_frac, universe.size());
  LinkSplit split;
  split.n_entities = n;
  split.test.assign(universe.begin(), universe.begin() + n_test);
  split.train.assign(universe.begin() + n_test, universe.end());
  carve_dev(split, std::min(n_test, split.train.size() / 2), rng);
  return split;
}

void carve_dev(LinkSplit &split, std::size_t count, RngStream &rng) {
  if (count > split.train.size())
    throw CapacityError("dev set larger than training set");
  std::shuffle(split.train.begin(), split.train.end(), rng.engine());
  split.dev.insert(split.dev.end(), split.train.end() - count,
                   split.train.end());
  split.train.resize(split.train.size() - count);
}

LinkSplit split_sparse(const Network &net, double pos_train_frac,
                       int neg_multiple, RngStream &rng) {
  if (!(pos_train_frac > 0.0 && pos_train_frac <= 1.0))
    throw ParameterError("positive train fraction must lie in (0, 1]");
  if (neg_multiple < 1)
    throw ParameterError("negative multiple must be positive");
  const auto positives = positive_pairs(net);
  std::vector<Observation> pos;
  for (const auto &l : net.links)
    if (l.sign > 0 && l.src != l.dst)
      pos.push_back({l.src, l.dst, 1});
  std::sort(pos.begin(), pos.end(), [](const auto &a, const auto &b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  std::shuffle(pos.begin(), pos.end(), rng.engine());

  const std::size_t n_test_pos = held_out_count(pos_train_frac, pos.size());
  if (n_test_pos == 0)
    throw CapacityError("no positive links left for the test set");
  const std::size_t n_train_pos = pos.size() - n_test_pos;
  const std::size_t n_train_neg =
      n_train_pos * static_cast<std::size_t>(neg_multiple);
  const std::size_t n_neg = n_train_neg + n_test_pos;

  const std::size_t n = static_cast<std::size_t>(net.n_entities);
  const std::size_t available = n * (n - 1) - positives.size();
  if (n_neg > available)
    throw CapacityError("network has " + std::to_string(available) +
                        " non-links, split needs " + std::to_string(n_neg));

  std::vector<Observation> neg;
  neg.reserve(n_neg);
  if (2 * n_neg > available) {
    // Dense regime: enumerate non-links, then take a uniform prefix.
    for (int i = 0; i < net.n_entities; ++i)
      for (int j = 0; j < net.n_entities; ++j)
        if (i != j && !positives.count(pair_key(i, j)))
          neg.push_back({i, j, -1});
    std::shuffle(neg.begin(), neg.end(), rng.engine());
    neg.resize(n_neg);
  } else {
    std::unordered_set<std::uint64_t> taken;
    std::uniform_int_distribution<int> pick(0, net.n_entities - 1);
    while (neg.size() < n_neg) {
      const int i = pick(rng.engine());
      const int j = pick(rng.engine());
      if (i == j)
        continue;
      const auto key = pair_key(i, j);
      if (positives.count(key) || !taken.insert(key).second)
        continue;
      neg.push_back({i, j, -1});
    }
  }

  LinkSplit split;
  split.n_entities = net.n_entities;
  split.train.assign(pos.begin() + n_test_pos, pos.end());
  split.train.insert(split.train.end(), neg.begin(), neg.begin() + n_train_neg);
  split.test.assign(pos.begin(), pos.begin() + n_test_pos);
  split.test.insert(split.test.end(), neg.begin() + n_train_neg, neg.end());
  return split;
}

std::vector<Network> per_relation_views(const Network &net) {
  if (net.links.empty())
    return {net};
  std::map<int, Network> views;
  for (const auto &l : net.links) {
    if (l.relation < 0)
      throw UsageError("per-relation views need a relation id on every link");
    auto &v = views[l.relation];
    v.n_entities = net.n_entities;
    v.links.push_back(l);
  }
  std::vector<Network> out;
  out.reserve(views.size());
  for (auto &[rel, v] : views)
    out.push_back(std::move(v));
  return out;
}

void write_split(const LinkSplit &split, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write split file " + path.string());
  out << "# dlfrm split v1\n# n_entities " << split.n_entities << '\n';
  auto emit = [&](const char *role, const std::vector<Observation> &obs) {
    for (const auto &o : obs)
      out << role << ' ' << o.src << ' ' << o.dst << ' ' << o.sign << '\n';
  };
  emit("train", split.train);
  emit("dev", split.dev);
  emit("test", split.test);
  if (!out)
    throw IoError("failed writing split file " + path.string());
}

LinkSplit read_split(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open split file " + path.string());
  LinkSplit split;
  split.n_entities = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      if (hs >> key && key == "n_entities" && !(hs >> split.n_entities))
        throw ParseError("bad n_entities header", lineno);
      continue;
    }
    std::istringstream ls(line);
    std::string role;
    Observation o;
    if (!(ls >> role >> o.src >> o.dst >> o.sign) ||
        (o.sign != 1 && o.sign != -1))
      throw ParseError("expected `role src dst sign`", lineno);
    if (role == "train")
      split.train.push_back(o);
    else if (role == "dev")
      split.dev.push_back(o);
    else if (role == "test")
      split.test.push_back(o);
    else
      throw ParseError("unknown role `" + role + "`", lineno);
  }
  if (split.n_entities < 0)
    throw ParseError("split file lacks an n_entities header", lineno);
  for (const auto *set : {&split.train, &split.dev, &split.test})
    for (const auto &o : *set)
      if (o.src < 0 || o.dst < 0 || o.src >= split.n_entities ||
          o.dst >= split.n_entities)
        throw RangeError("split references entity outside 0.." +
                         std::to_string(split.n_entities - 1));
  return split;
}

Network training_network(const LinkSplit &split) {
  Network net;
  net.n_entities = split.n_entities;
  for (const auto &o : split.train)
    if (o.sign > 0)
      net.links.push_back({o.src, o.dst, 1, -1});
  return net;
}

} // namespace dlfrm
