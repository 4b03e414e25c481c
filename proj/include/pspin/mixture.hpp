#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pspin {

enum class MixtureClass { PureLike, Critical, Full };

const char* to_string(MixtureClass k);

// Covariance mixture xi(x) = sum_p gamma_p^2 x^p with finite support.
// Coefficients are stored squared (gamma_sq), keyed by degree p >= 2 and
// sorted ascending; every formula downstream consumes the squares.
struct MixtureSpec {
    static constexpr int kDefaultMaxDegree = 32;
    static constexpr double kNormalizationTol = 1e-12;

    std::vector<std::pair<int, double>> gamma_sq;  // (degree, gamma_p^2), sorted by degree
    bool normalized = false;                       // |sum gamma_sq - 1| <= 1e-12
    int max_degree = kDefaultMaxDegree;            // P_max cap

    static MixtureSpec pure(int p);
    // Validates degrees, signs, the max-degree cap and sets the normalized flag.
    static MixtureSpec from_pairs(std::vector<std::pair<int, double>> pairs,
                                  int max_degree = kDefaultMaxDegree);
    // CLI form "p:val,p:val" with val = gamma_p^2.
    static MixtureSpec parse(std::string_view text);
    // JSON object {"gamma2": g2sq, "gamma3": g3sq, ...} (squared coefficients).
    static MixtureSpec from_json_text(const std::string& text);
    std::string to_json_text() const;

    double gamma_sq_at(int p) const;
    double total_weight() const;  // xi(1)
    bool is_pure() const { return gamma_sq.size() == 1; }
    int pure_degree() const;  // valid only when is_pure()
    int highest_degree() const { return gamma_sq.back().first; }
};

struct DerivedMoments {
    double xi1;      // xi(1)
    double xip;      // xi'(1)
    double xipp;     // xi''(1)
    double g_value;  // classification functional G(xi', xi'')
    MixtureClass klass;
    bool is_pure;
};

// xi(x) as the finite sum; exact polynomial evaluation.
double xi_eval(const MixtureSpec& spec, double x);

DerivedMoments derive_moments(const MixtureSpec& spec);

struct EInfThresholds {
    std::optional<double> pure;  // 2 sqrt((p-1)/p), pure models only
    double primed;               // 2 xi' sqrt(xi'') / (xi' + xi'')
    double mixed;                // (xi'' + xi'^2 - xi') / (xi' sqrt(xi''))
};

EInfThresholds e_inf_thresholds(const MixtureSpec& spec);

}  // namespace pspin
