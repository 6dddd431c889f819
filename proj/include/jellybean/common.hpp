#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace jb {

// Error taxonomy. Everything user-facing derives from Error so the CLI can
// catch one type and print a clean message.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct NoViablePath : Error { using Error::Error; };
struct WindowTooLarge : Error { using Error::Error; };
struct SeriesTooShort : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct RunOverflow : Error { using Error::Error; };
struct TruncationTooWide : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct FingerprintTooShort : Error { using Error::Error; };
struct InvalidDwell : Error { using Error::Error; };
struct InvalidArgs : Error { using Error::Error; };
struct NothingObserved : Error { using Error::Error; };
struct NoActivity : Error { using Error::Error; };
struct EmptyComparison : Error { using Error::Error; };
struct SequenceTooShort : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct UnknownParam : Error { using Error::Error; };

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kNegInfDbm = -std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

inline double db_to_lin_amp(double db) { return std::pow(10.0, db / 20.0); }
inline double db_to_lin_pow(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_pow_to_db(double p) { return 10.0 * std::log10(p); }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Angle of a direction vector in degrees, normalized to [0, 360).
inline double angle_deg(Vec2 v) {
    double a = std::atan2(v.y, v.x) * 180.0 / kPi;
    if (a < 0.0) a += 360.0;
    return a;
}

inline double wrap_deg(double a) {
    a = std::fmod(a, 360.0);
    if (a < 0.0) a += 360.0;
    return a;
}

// Smallest absolute angular difference in degrees, in [0, 180].
inline double ang_diff_deg(double a, double b) {
    double d = std::fabs(wrap_deg(a) - wrap_deg(b));
    return d > 180.0 ? 360.0 - d : d;
}

// Distance from point p to segment [a, b].
inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = ab.dot(ab);
    if (len2 == 0.0) return distance(p, a);
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + ab * t);
}

// Proper intersection test between segments [p1,p2] and [q1,q2].
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
        double v = (b - a).cross(c - a);
        if (v > 1e-12) return 1;
        if (v < -1e-12) return -1;
        return 0;
    };
    int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    return o1 != o2 && o3 != o4;
}

using BitSeq = std::vector<uint8_t>;  // each element 0 or 1

inline std::string bits_to_string(const BitSeq& b) {
    std::string s;
    s.reserve(b.size());
    for (auto v : b) s.push_back(v ? '1' : '0');
    return s;
}

inline BitSeq bits_from_string(const std::string& s) {
    BitSeq b;
    b.reserve(s.size());
    for (char c : s) {
        if (c == '0') b.push_back(0);
        else if (c == '1') b.push_back(1);
        // anything else (spaces, separators) is skipped
    }
    return b;
}

}  // namespace jb
