#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "nneg/errors.hpp"

namespace nneg {

/// Annual mortality table over a contiguous age range; the last age is
/// terminal (qx = 1), so a cohort is extinguished by table end.
class MortalityTable {
public:
    MortalityTable(int first_age, std::vector<double> qx)
        : first_age_(first_age), qx_(std::move(qx)) {
        if (qx_.empty()) throw ValidationError("MortalityTable: empty table");
        for (std::size_t i = 0; i < qx_.size(); ++i) {
            if (!(qx_[i] >= 0.0 && qx_[i] <= 1.0))
                throw ValidationError("MortalityTable: qx out of [0,1] at age " +
                                      std::to_string(first_age_ + static_cast<int>(i)));
        }
        if (qx_.back() != 1.0)
            throw ValidationError("MortalityTable: terminal age " +
                                  std::to_string(last_age()) + " must have qx = 1");
    }

    int first_age() const { return first_age_; }
    int last_age() const { return first_age_ + static_cast<int>(qx_.size()) - 1; }
    bool contains(int age) const { return age >= first_age() && age <= last_age(); }

    double qx(int age) const {
        if (!contains(age))
            throw ValidationError("MortalityTable: age " + std::to_string(age) +
                                  " outside table range [" + std::to_string(first_age()) +
                                  ", " + std::to_string(last_age()) + "]");
        return qx_[static_cast<std::size_t>(age - first_age_)];
    }

private:
    int first_age_;
    std::vector<double> qx_;
};

/// A cohort of identical lives at one point in time.
struct CohortState {
    int n_alive = 0;
    int age = 0;
    int t = 0;
};

/// Parse the mortality CSV format: header "age,qx", one row per integer age,
/// contiguous ascending ages, '.' decimal separator.
inline MortalityTable load_table(std::istream& source) {
    std::string line;
    int lineno = 0;
    if (!std::getline(source, line)) throw ValidationError("mortality CSV: empty input");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "age,qx")
        throw ValidationError("mortality CSV line 1: expected header 'age,qx', got '" + line + "'");

    int first_age = 0;
    std::vector<double> qx;
    while (std::getline(source, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("mortality CSV line " + std::to_string(lineno) + ": missing comma");
        int age = 0;
        double q = 0.0;
        try {
            std::size_t used = 0;
            age = std::stoi(line.substr(0, comma), &used);
            if (used != comma) throw std::invalid_argument("trailing");
            const std::string qs = line.substr(comma + 1);
            q = std::stod(qs, &used);
            if (used != qs.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("mortality CSV line " + std::to_string(lineno) +
                                  ": cannot parse '" + line + "'");
        }
        if (!(q >= 0.0 && q <= 1.0))
            throw ValidationError("mortality CSV line " + std::to_string(lineno) +
                                  ": probability out of range at age " + std::to_string(age));
        if (qx.empty()) {
            first_age = age;
        } else if (age != first_age + static_cast<int>(qx.size())) {
            throw ValidationError("mortality CSV line " + std::to_string(lineno) +
                                  ": ages must be contiguous, expected " +
                                  std::to_string(first_age + static_cast<int>(qx.size())) +
                                  " got " + std::to_string(age));
        }
        qx.push_back(q);
    }
    if (qx.empty()) throw ValidationError("mortality CSV: no data rows");
    if (qx.back() != 1.0)
        throw ValidationError("mortality CSV: missing terminal age (last qx must be 1)");
    return MortalityTable(first_age, std::move(qx));
}

inline MortalityTable load_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open mortality table '" + path + "'");
    try {
        return load_table(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

/// One-year death probability at the given age.
inline double period_death_prob(const MortalityTable& table, int age) { return table.qx(age); }

/// Expected deaths per period: q_t = n * S(t-1) * qx(age+t-1), t = 1..horizon.
/// Ages past the terminal age contribute zero (survival is already zero).
inline Eigen::VectorXd expected_deaths_schedule(const MortalityTable& table, int start_age,
                                                double n, int horizon) {
    if (!table.contains(start_age))
        throw ValidationError("expected_deaths_schedule: start age out of table range");
    if (horizon < 0) throw ValidationError("expected_deaths_schedule: horizon must be >= 0");
    if (!(n >= 0.0)) throw ValidationError("expected_deaths_schedule: n must be >= 0");
    Eigen::VectorXd sched = Eigen::VectorXd::Zero(horizon);
    double survival = 1.0;
    for (int t = 1; t <= horizon; ++t) {
        const int age = start_age + t - 1;
        if (age > table.last_age()) break;  // survival is zero past the terminal age
        const double q = table.qx(age);
        sched[t - 1] = n * survival * q;
        survival *= 1.0 - q;
    }
    return sched;
}

}  // namespace nneg
