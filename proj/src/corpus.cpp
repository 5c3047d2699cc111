#include "moral/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "moral/error.hpp"
#include "moral/rng.hpp"

namespace moral {

namespace {

std::array<std::size_t, 16> count_votes(const std::vector<LabelSet>& annotator_labels,
                                        LabelScheme scheme) {
  std::array<std::size_t, 16> counts{};
  for (const LabelSet& a : annotator_labels) {
    if (a.scheme() != scheme) throw data_error("annotation scheme mismatch");
    for (const Label& l : a.labels()) ++counts[l.index()];
  }
  return counts;
}

LabelSet parse_label_set(const std::vector<std::string>& names, std::size_t line_no) {
  LabelSet s(LabelScheme::Elements11);
  for (const std::string& n : names) {
    const auto label = Label::parse(n);
    if (!label) {
      throw data_error("line " + std::to_string(line_no) + ": unknown label '" + n + "'");
    }
    s.insert(*label);
  }
  if (s.contains(Label::non_moral()) && s.has_moral()) {
    throw data_error("line " + std::to_string(line_no) +
                     ": non-moral mixed with moral labels in one annotation");
  }
  return s;
}

}  // namespace

LabelSet majority_vote(const std::vector<LabelSet>& annotator_labels, MajorityRule rule) {
  if (annotator_labels.empty()) throw data_error("majority_vote: empty annotation list");
  const LabelScheme scheme = annotator_labels.front().scheme();
  const auto counts = count_votes(annotator_labels, scheme);
  const std::size_t n = annotator_labels.size();

  LabelSet result(scheme);
  for (std::uint8_t i = 0; i < non_moral_index(scheme); ++i) {
    const bool wins = rule == MajorityRule::Strict ? 2 * counts[i] > n : 2 * counts[i] >= n;
    if (wins) result.insert(Label(scheme, i));
  }
  if (result.empty()) result.insert(Label::non_moral(scheme));
  return result;
}

void resolve_labels(Corpus& c, MajorityRule rule) {
  for (Document& d : c.documents) d.resolved = majority_vote(d.annotator_labels, rule);
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(ch));
  }
  return out;
}

Corpus collapse_duplicates(const Corpus& c, MajorityRule rule) {
  // Group by normalized text, keeping first-seen order of groups.
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < c.documents.size(); ++i) {
    const std::string key = normalize_text(c.documents[i].text);
    auto [it, inserted] = group_of.try_emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  Corpus out;
  for (const auto& members : groups) {
    std::size_t keeper = members.front();
    for (std::size_t idx : members) {
      if (c.documents[idx].id < c.documents[keeper].id) keeper = idx;
    }
    Document merged = c.documents[keeper];
    if (members.size() > 1) {
      merged.annotator_labels.clear();
      for (std::size_t idx : members) {
        const auto& src = c.documents[idx].annotator_labels;
        merged.annotator_labels.insert(merged.annotator_labels.end(), src.begin(), src.end());
      }
    }
    merged.resolved = majority_vote(merged.annotator_labels, rule);
    out.domains.insert(merged.domain);
    out.documents.push_back(std::move(merged));
  }
  return out;
}

std::pair<Corpus, Corpus> stratified_split(const Corpus& c, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw data_error("stratified_split: train_fraction must be in (0,1)");

  std::map<std::string, std::vector<std::size_t>> by_domain;
  for (std::size_t i = 0; i < c.documents.size(); ++i)
    by_domain[c.documents[i].domain].push_back(i);

  std::vector<bool> in_test(c.documents.size(), false);
  Rng rng(spec.seed);
  for (auto& [domain, indices] : by_domain) {
    const double want = (1.0 - spec.train_fraction) * static_cast<double>(indices.size());
    const auto test_count = static_cast<std::size_t>(std::llround(want));
    rng.shuffle(indices);
    for (std::size_t i = 0; i < test_count && i < indices.size(); ++i)
      in_test[indices[i]] = true;
  }

  Corpus train, test;
  for (std::size_t i = 0; i < c.documents.size(); ++i) {
    Corpus& dst = in_test[i] ? test : train;
    dst.documents.push_back(c.documents[i]);
    dst.domains.insert(c.documents[i].domain);
  }
  return {std::move(train), std::move(test)};
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open corpus file: " + path.string());

  Corpus c;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw data_error("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
    }
    Document d;
    try {
      d.id = obj.at("id").get<std::string>();
      d.text = obj.at("text").get<std::string>();
      d.domain = obj.at("domain").get<std::string>();
      for (const auto& ann : obj.at("annotations")) {
        d.annotator_labels.push_back(
            parse_label_set(ann.get<std::vector<std::string>>(), line_no));
      }
    } catch (const nlohmann::json::exception& e) {
      throw data_error("line " + std::to_string(line_no) + ": missing or mistyped field (" +
                       e.what() + ")");
    }
    if (d.annotator_labels.empty())
      throw data_error("line " + std::to_string(line_no) + ": document has no annotations");
    if (!seen_ids.insert(d.id).second)
      throw data_error("line " + std::to_string(line_no) + ": duplicate document id '" + d.id + "'");
    c.domains.insert(d.domain);
    c.documents.push_back(std::move(d));
  }
  return c;
}

void save_corpus(const Corpus& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write corpus file: " + path.string());
  for (const Document& d : c.documents) {
    nlohmann::json obj;
    obj["id"] = d.id;
    obj["text"] = d.text;
    obj["domain"] = d.domain;
    auto& anns = obj["annotations"] = nlohmann::json::array();
    for (const LabelSet& s : d.annotator_labels) {
      nlohmann::json one = nlohmann::json::array();
      for (const Label& l : s.labels()) one.push_back(std::string(l.name()));
      anns.push_back(std::move(one));
    }
    out << obj.dump() << "\n";
  }
}

std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open lexicon file: " + path.string());

  std::vector<LexiconEntry> entries;
  std::set<std::string> seen_words;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw data_error("line " + std::to_string(line_no) + ": expected `word<TAB>element`");
    const std::string word = line.substr(0, tab);
    const std::string name = line.substr(tab + 1);
    if (word.empty())
      throw data_error("line " + std::to_string(line_no) + ": empty word");
    const auto label = Label::parse(name);
    if (!label || label->is_non_moral())
      throw data_error("line " + std::to_string(line_no) + ": unknown label '" + name + "'");
    if (!seen_words.insert(word).second)
      throw data_error("line " + std::to_string(line_no) + ": duplicate word '" + word + "'");
    entries.push_back({word, label->as_element()});
  }
  return entries;
}

std::vector<std::pair<Label, std::size_t>> label_distribution(const Corpus& c) {
  std::vector<std::pair<Label, std::size_t>> out;
  for (std::uint8_t i = 0; i < scheme_size(LabelScheme::Elements11); ++i)
    out.emplace_back(Label(LabelScheme::Elements11, i), 0);
  for (const Document& d : c.documents) {
    for (const Label& l : d.resolved.labels()) out[l.index()].second += 1;
  }
  return out;
}

namespace {

std::map<std::string, std::size_t> token_frequencies(const Corpus& c, Label label) {
  std::map<std::string, std::size_t> freq;
  for (const Document& d : c.documents) {
    if (!d.resolved.contains(label)) continue;
    std::string token;
    auto flush = [&] {
      if (!token.empty()) {
        ++freq[token];
        token.clear();
      }
    };
    for (unsigned char ch : d.text) {
      if (std::isalnum(ch)) {
        token += static_cast<char>(std::tolower(ch));
      } else {
        flush();
      }
    }
    flush();
  }
  return freq;
}

}  // namespace

std::vector<TokenOverlapRow> token_overlap_report(const Corpus& c, Label a, Label b,
                                                  std::size_t top_k) {
  if (top_k == 0) throw data_error("token_overlap_report: top_k must be >= 1");
  const auto freq_a = token_frequencies(c, a);
  const auto freq_b = token_frequencies(c, b);

  std::vector<TokenOverlapRow> rows;
  for (const auto& [token, fa] : freq_a) {
    const auto it = freq_b.find(token);
    if (it != freq_b.end()) rows.push_back({token, fa, it->second});
  }
  std::sort(rows.begin(), rows.end(), [](const TokenOverlapRow& x, const TokenOverlapRow& y) {
    const std::size_t mx = std::min(x.freq_a, x.freq_b);
    const std::size_t my = std::min(y.freq_a, y.freq_b);
    if (mx != my) return mx > my;
    return x.token < y.token;
  });
  if (rows.size() > top_k) rows.resize(top_k);
  return rows;
}

std::vector<std::pair<Label, std::vector<std::string>>> label_groups(const Corpus& c,
                                                                     LabelScheme scheme) {
  std::vector<std::vector<std::string>> buckets(scheme_size(scheme));
  for (const Document& d : c.documents) {
    const LabelSet resolved =
        scheme == LabelScheme::Elements11 ? d.resolved : to_foundation_scheme(d.resolved);
    for (const Label& l : resolved.labels()) buckets[l.index()].push_back(d.id);
  }
  std::vector<std::pair<Label, std::vector<std::string>>> out;
  for (std::uint8_t i = 0; i < buckets.size(); ++i) {
    if (buckets[i].empty()) continue;
    std::sort(buckets[i].begin(), buckets[i].end());
    out.emplace_back(Label(scheme, i), std::move(buckets[i]));
  }
  return out;
}

}  // namespace moral
