#include "pspin/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pspin/errors.hpp"

namespace pspin {

const char* to_string(MixtureClass k) {
    switch (k) {
        case MixtureClass::PureLike: return "pure_like";
        case MixtureClass::Critical: return "critical";
        case MixtureClass::Full: return "full";
    }
    return "unknown";
}

MixtureSpec MixtureSpec::pure(int p) { return from_pairs({{p, 1.0}}); }

MixtureSpec MixtureSpec::from_pairs(std::vector<std::pair<int, double>> pairs, int max_degree) {
    if (pairs.empty()) throw SpecInvalid("mixture spec has no coefficients");
    std::sort(pairs.begin(), pairs.end());
    double total = 0.0;
    int prev = -1;
    for (auto& [p, gsq] : pairs) {
        if (p < 2) throw SpecInvalid("mixture degree must be >= 2, got " + std::to_string(p));
        if (p > max_degree)
            throw SpecInvalid("mixture degree " + std::to_string(p) + " exceeds cap " +
                              std::to_string(max_degree));
        if (p == prev) throw SpecInvalid("duplicate mixture degree " + std::to_string(p));
        if (!(gsq >= 0.0)) throw SpecInvalid("squared coefficient must be nonnegative");
        prev = p;
        total += gsq;
    }
    if (total <= 0.0) throw SpecInvalid("mixture spec needs at least one positive coefficient");
    // Drop exact zeros; they carry no information and would break is_pure().
    pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                               [](const auto& pr) { return pr.second == 0.0; }),
                pairs.end());
    MixtureSpec spec;
    spec.gamma_sq = std::move(pairs);
    spec.max_degree = max_degree;
    spec.normalized = std::abs(total - 1.0) <= kNormalizationTol;
    return spec;
}

MixtureSpec MixtureSpec::parse(std::string_view text) {
    std::vector<std::pair<int, double>> pairs;
    std::string buf(text);
    std::stringstream ss(buf);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw SpecInvalid("bad mixture token '" + item + "', expected p:value");
        try {
            const int p = std::stoi(item.substr(0, colon));
            const double v = std::stod(item.substr(colon + 1));
            pairs.emplace_back(p, v);
        } catch (const std::exception&) {
            throw SpecInvalid("bad mixture token '" + item + "'");
        }
    }
    return from_pairs(std::move(pairs));
}

MixtureSpec MixtureSpec::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_object()) throw SpecInvalid("mixture JSON must be an object");
    std::vector<std::pair<int, double>> pairs;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key.rfind("gamma", 0) != 0)
            throw SpecInvalid("unexpected key '" + key + "' in mixture JSON");
        try {
            pairs.emplace_back(std::stoi(key.substr(5)), it.value().get<double>());
        } catch (const std::exception&) {
            throw SpecInvalid("bad mixture entry '" + key + "'");
        }
    }
    return from_pairs(std::move(pairs));
}

std::string MixtureSpec::to_json_text() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [p, gsq] : gamma_sq) j["gamma" + std::to_string(p)] = gsq;
    return j.dump();
}

double MixtureSpec::gamma_sq_at(int p) const {
    for (const auto& [q, gsq] : gamma_sq)
        if (q == p) return gsq;
    return 0.0;
}

double MixtureSpec::total_weight() const {
    double total = 0.0;
    for (const auto& [p, gsq] : gamma_sq) total += gsq;
    return total;
}

int MixtureSpec::pure_degree() const {
    if (!is_pure()) throw SpecInvalid("pure_degree() called on a genuine mixture");
    return gamma_sq.front().first;
}

double xi_eval(const MixtureSpec& spec, double x) {
    double acc = 0.0;
    for (const auto& [p, gsq] : spec.gamma_sq) acc += gsq * std::pow(x, p);
    return acc;
}

DerivedMoments derive_moments(const MixtureSpec& spec) {
    DerivedMoments m{};
    for (const auto& [p, gsq] : spec.gamma_sq) {
        m.xi1 += gsq;
        m.xip += p * gsq;
        m.xipp += p * (p - 1.0) * gsq;
    }
    m.g_value = std::log(m.xipp / m.xip) -
                (m.xipp - m.xip) * (m.xipp - m.xip + m.xip * m.xip) / (m.xipp * m.xip * m.xip);
    if (m.g_value > 1e-12)
        m.klass = MixtureClass::PureLike;
    else if (m.g_value < -1e-12)
        m.klass = MixtureClass::Full;
    else
        m.klass = MixtureClass::Critical;
    m.is_pure = spec.is_pure();
    return m;
}

EInfThresholds e_inf_thresholds(const MixtureSpec& spec) {
    const DerivedMoments m = derive_moments(spec);
    EInfThresholds t;
    if (spec.is_pure()) {
        const double p = spec.pure_degree();
        t.pure = 2.0 * std::sqrt((p - 1.0) / p);
    }
    t.primed = 2.0 * m.xip * std::sqrt(m.xipp) / (m.xip + m.xipp);
    t.mixed = (m.xipp + m.xip * m.xip - m.xip) / (m.xip * std::sqrt(m.xipp));
    return t;
}

}  // namespace pspin
