#include "dualdrive/agent/experience.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>
#include <mutex>
#include <stdexcept>

#include "dualdrive/perception/scene_json.hpp"

namespace dd::agent {

using nlohmann::json;

double cosine(const SceneToken& a, const SceneToken& b) {
    if (a.values.size() != b.values.size() || a.values.empty())
        throw std::invalid_argument("cosine: token dims differ or are empty");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na <= 0.0 || nb <= 0.0) throw std::invalid_argument("cosine: zero token");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string to_string(Provenance p) {
    return p == Provenance::analytic ? "analytic" : "reflection";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "analytic") return Provenance::analytic;
    if (s == "reflection") return Provenance::reflection;
    throw std::runtime_error("unknown provenance '" + s + "'");
}

MemoryBank::MemoryBank(const MemoryBank& other) {
    std::shared_lock lock(other.mutex_);
    experiences_ = other.experiences_;
}

MemoryBank& MemoryBank::operator=(const MemoryBank& other) {
    if (this == &other) return *this;
    std::vector<Experience> copy;
    {
        std::shared_lock lock(other.mutex_);
        copy = other.experiences_;
    }
    std::unique_lock lock(mutex_);
    experiences_ = std::move(copy);
    return *this;
}

void MemoryBank::insert(Experience exp) {
    if (!exp.token.valid())
        throw std::invalid_argument("bank insert: token must have dim 256");
    std::unique_lock lock(mutex_);
    experiences_.push_back(std::move(exp));
}

std::size_t MemoryBank::size() const {
    std::shared_lock lock(mutex_);
    return experiences_.size();
}

Experience MemoryBank::at(std::size_t index) const {
    std::shared_lock lock(mutex_);
    return experiences_.at(index);
}

std::vector<Experience> MemoryBank::all() const {
    std::shared_lock lock(mutex_);
    return experiences_;
}

std::vector<RetrievedExperience> MemoryBank::retrieve_topk(const SceneToken& query, int k) const {
    if (k < 0) throw std::invalid_argument("retrieve_topk: k must be >= 0");
    std::shared_lock lock(mutex_);
    const std::size_t n = experiences_.size();
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    if (kk == 0) return {};

    std::vector<double> sims(n);
    for (std::size_t i = 0; i < n; ++i) sims[i] = cosine(query, experiences_[i].token);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(kk), idx.end(),
                      [&sims](std::size_t a, std::size_t b) {
                          if (sims[a] != sims[b]) return sims[a] > sims[b];
                          return a < b;
                      });

    std::vector<RetrievedExperience> out;
    out.reserve(kk);
    for (std::size_t r = 0; r < kk; ++r) {
        out.push_back({experiences_[idx[r]], sims[idx[r]], idx[r]});
    }
    return out;
}

bool violates_hard_rules(const Experience& exp) {
    if (exp.decision != MetaAction::AC) return false;
    if (exp.description.objects.empty()) return false;
    const perception::CriticalObject& nearest = exp.description.objects.front();
    if (nearest.category == perception::ObjectCategory::traffic_light && nearest.light_is_red)
        return true;
    const bool close_lead =
        (nearest.category == perception::ObjectCategory::vehicle ||
         nearest.category == perception::ObjectCategory::cyclist) &&
        nearest.lane_relation == perception::LaneRelation::same &&
        nearest.trend == perception::MotionTrend::approaching && nearest.distance < 8.0;
    return close_lead;
}

std::size_t MemoryBank::revise() {
    std::unique_lock lock(mutex_);
    const std::size_t before = experiences_.size();

    // newest-first scan so duplicates keep the most recent copy
    std::vector<bool> drop(experiences_.size(), false);
    for (std::size_t i = experiences_.size(); i-- > 0;) {
        if (drop[i]) continue;
        if (violates_hard_rules(experiences_[i])) {
            drop[i] = true;
            continue;
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (drop[j]) continue;
            if (experiences_[j].decision == experiences_[i].decision &&
                experiences_[j].token.values == experiences_[i].token.values) {
                drop[j] = true;
            }
        }
    }
    std::vector<Experience> kept;
    kept.reserve(experiences_.size());
    for (std::size_t i = 0; i < experiences_.size(); ++i) {
        if (!drop[i]) kept.push_back(std::move(experiences_[i]));
    }
    experiences_ = std::move(kept);
    return before - experiences_.size();
}

namespace {

json experience_to_json(const Experience& e) {
    return json{{"token", e.token.values},
                {"description", perception::to_json_value(e.description)},
                {"reasoning", e.reasoning},
                {"decision", to_string(e.decision)},
                {"provenance", to_string(e.provenance)},
                {"fallback", e.reflection_fallback},
                {"created_at", {{"episode", e.created_at.episode}, {"tick", e.created_at.tick}}}};
}

Experience experience_from_json(const json& j) {
    Experience e;
    e.token.values = j.at("token").get<std::vector<double>>();
    if (!e.token.valid()) throw std::runtime_error("experience record: bad token dim");
    e.description = perception::scene_description_from_json(j.at("description"));
    e.reasoning = j.value("reasoning", std::string());
    const auto action = meta_action_from_string(j.at("decision").get<std::string>());
    if (!action) throw std::runtime_error("experience record: bad decision");
    e.decision = *action;
    e.provenance = provenance_from_string(j.value("provenance", std::string("analytic")));
    e.reflection_fallback = j.value("fallback", false);
    if (j.contains("created_at")) {
        e.created_at.episode = j["created_at"].value("episode", 0L);
        e.created_at.tick = j["created_at"].value("tick", 0L);
    }
    return e;
}

}  // namespace

void MemoryBank::persist(const std::string& path) const {
    std::vector<Experience> copy = all();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write bank file: " + path);
    for (const Experience& e : copy) out << experience_to_json(e).dump() << "\n";
    if (!out) throw std::runtime_error("write failed for bank file: " + path);
}

MemoryBank MemoryBank::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bank file: " + path);
    MemoryBank bank;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            bank.insert(experience_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error("bank file line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return bank;
}

MemoryBank MemoryBank::load_lenient(const std::string& path, std::size_t* skipped) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bank file: " + path);
    MemoryBank bank;
    std::string line;
    std::size_t bad = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            bank.insert(experience_from_json(json::parse(line)));
        } catch (const std::exception&) {
            ++bad;
        }
    }
    if (skipped) *skipped = bad;
    return bank;
}

MemoryBank MemoryBank::subsample(std::size_t count, unsigned long seed) const {
    std::vector<Experience> copy = all();
    if (count >= copy.size()) return *this;

    // Seeded Fisher-Yates over indices, then restore insertion order.
    std::vector<std::size_t> idx(copy.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> dist(i, idx.size() - 1);
        std::swap(idx[i], idx[dist(rng)]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());

    MemoryBank out;
    for (std::size_t i : idx) out.insert(copy[i]);
    return out;
}

}  // namespace dd::agent
