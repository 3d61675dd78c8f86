// Copyright 2026 The qlwe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "qlwe/commitment.hpp"
#include "qlwe/gaussian.hpp"
#include "qlwe/gsets.hpp"
#include "qlwe/json_io.hpp"

namespace qlwe {

// ---- messages ---------------------------------------------------------------

struct PreimageResponse {
    int b = 0;
    ZqVector x;
};

struct EquationResponse {
    int c = 0;
    Bits d;
};

using Response = std::variant<PreimageResponse, EquationResponse>;

inline Json to_json(const Response &r) {
    if (const auto *p = std::get_if<PreimageResponse>(&r)) {
        return Json{{"b", p->b}, {"x", to_json(p->x)}};
    }
    const auto &e = std::get<EquationResponse>(r);
    return Json{{"c", e.c}, {"d", bits_to_json(e.d)}};
}

inline Response response_from_json(const Json &j) {
    if (j.contains("b")) {
        return PreimageResponse{get_field(j, "b", "response").get<int>(), vector_from_json(get_field(j, "x", "response"))};
    }
    return EquationResponse{get_field(j, "c", "response").get<int>(), bits_from_json(get_field(j, "d", "response"))};
}

// ---- verifier keys ------------------------------------------------------------

/// The verifier's secrets for one run. With a gadget trapdoor, inversion is
/// the trapdoor decoder; otherwise (desk shapes with m below the gadget row
/// count) it is the brute-force nearest lattice point, which needs q^n to be
/// enumerable.
struct VerifierKeys {
    LweInstance instance;  // A, u = A s + e, with s and e as witnesses
    std::optional<GadgetTrapdoor> trapdoor;

    const ZqVector &s() const { return *instance.s_witness; }
    const ZqVector &e() const { return *instance.e_witness; }

    /// (A, u) only.
    LweInstance public_instance() const { return LweInstance{instance.A, instance.u, std::nullopt, std::nullopt, {}}; }
};

inline const char *keygen_name(const VerifierKeys &k) { return k.trapdoor ? "gentrap" : "uniform"; }

inline bool uses_gadget_trapdoor(const ProtocolParams &p) {
    return is_power_of_two(p.q) && p.m >= gentrap_min_rows(p.n, p.q);
}

inline VerifierKeys generate_keys(const ProtocolParams &p, Rng &rng) {
    const auto n = static_cast<std::size_t>(p.n);
    const auto m = static_cast<std::size_t>(p.m);
    VerifierKeys keys;
    ZqMatrix A;
    if (uses_gadget_trapdoor(p)) {
        auto kp = gentrap(p.n, p.m, p.q, rng);
        A = std::move(kp.A);
        keys.trapdoor = std::move(kp.trapdoor);
    } else {
        require_enumerable(p.q, n, "verifier without gadget trapdoor");
        A = ZqMatrix::uniform(p.q, m, n, rng);
    }
    const ZqVector s = ZqVector::uniform(p.q, n, rng);
    const ZqVector e = TruncatedGaussian({p.q, p.B_V}).sample_vector(m, rng);
    keys.instance = make_instance(std::move(A), s, e);
    return keys;
}

/// argmin_x ||A x - y||, first in enumeration order on ties.
inline ZqVector decode_nearest(const ZqMatrix &A, const ZqVector &y) {
    require_enumerable(A.modulus(), A.cols(), "decode_nearest");
    std::optional<ZqVector> best;
    Int best_sq = 0;
    for_each_vector(A.modulus(), A.cols(), [&](const ZqVector &x) {
        const Int d = (A * x - y).sq_norm();
        if (!best || d < best_sq) {
            best = x;
            best_sq = d;
        }
    });
    return *best;
}

/// The verifier's INVERT(A, t_A, y); throws InversionFailed.
inline ZqVector verifier_invert(const ZqMatrix &A, const std::optional<GadgetTrapdoor> &t, const ZqVector &y) {
    return t ? invert(A, *t, y) : decode_nearest(A, y);
}

// ---- decision -----------------------------------------------------------------

enum class Reason { Accepted, R0Bound, R1InvertFailed, R1Bound, R1Equation, R1NotInG, Malformed };

inline const char *reason_name(Reason r) {
    switch (r) {
        case Reason::Accepted:
            return "accepted";
        case Reason::R0Bound:
            return "r0_bound";
        case Reason::R1InvertFailed:
            return "r1_invert_failed";
        case Reason::R1Bound:
            return "r1_bound";
        case Reason::R1Equation:
            return "r1_equation";
        case Reason::R1NotInG:
            return "r1_not_in_G";
        case Reason::Malformed:
            return "malformed";
    }
    return "?";
}

inline Reason reason_from_name(const std::string &s) {
    for (Reason r : {Reason::Accepted, Reason::R0Bound, Reason::R1InvertFailed, Reason::R1Bound, Reason::R1Equation,
                     Reason::R1NotInG, Reason::Malformed}) {
        if (s == reason_name(r)) {
            return r;
        }
    }
    throw ParameterError("unknown verdict reason '" + s + "'");
}

struct Verdict {
    bool accept = false;
    Reason reason = Reason::Malformed;
    std::optional<ZqVector> x0;  // the inverted commitment (r = 1)
};

inline bool within_radius(const ZqVector &v, double radius) {
    return static_cast<double>(v.sq_norm()) <= radius * radius * (1 + 1e-12);
}

/// Step 5. r = 0: accept iff ||A x + b u - y|| <= 2q / (C sqrt(n log q)).
/// r = 1: x0 = INVERT(y); accept iff ||A x0 - y|| is within the same bound,
/// c = d . (J(x0) xor J(x0 - s)) and d in G_{s,0,x0}.
inline Verdict decide(const ProtocolParams &p, const ZqMatrix &A, const ZqVector &u, const ZqVector &s,
                      const std::optional<GadgetTrapdoor> &trapdoor, const ZqVector &y, int r,
                      const Response &response) {
    const double radius = p.accept_radius();
    const auto n = A.cols();
    if (y.size() != A.rows() || y.modulus() != A.modulus()) {
        return {false, Reason::Malformed, std::nullopt};
    }
    if (r == 0) {
        const auto *pr = std::get_if<PreimageResponse>(&response);
        if (!pr || (pr->b != 0 && pr->b != 1) || pr->x.size() != n || pr->x.modulus() != A.modulus()) {
            return {false, Reason::Malformed, std::nullopt};
        }
        ZqVector v = A * pr->x - y;
        if (pr->b) {
            v = v + u;
        }
        return within_radius(v, radius) ? Verdict{true, Reason::Accepted, std::nullopt}
                                        : Verdict{false, Reason::R0Bound, std::nullopt};
    }
    const auto *eq = std::get_if<EquationResponse>(&response);
    if (!eq || (eq->c != 0 && eq->c != 1) || eq->d.size() != n * static_cast<std::size_t>(bit_length(A.modulus()))) {
        return {false, Reason::Malformed, std::nullopt};
    }
    ZqVector x0;
    try {
        x0 = verifier_invert(A, trapdoor, y);
    } catch (const InversionFailed &) {
        return {false, Reason::R1InvertFailed, std::nullopt};
    }
    if (!within_radius(A * x0 - y, radius)) {
        return {false, Reason::R1Bound, x0};
    }
    if (eq->c != equation_bit(eq->d, x0, x0 - s)) {
        return {false, Reason::R1Equation, x0};
    }
    if (!in_G_sbx(eq->d, s, 0, x0)) {
        return {false, Reason::R1NotInG, x0};
    }
    return {true, Reason::Accepted, x0};
}

// ---- verifier state machine -----------------------------------------------------

enum class VerifierPhase { Init, Committed, Challenged, Decided };

class Verifier {
   public:
    /// Step 1: key generation, s uniform, e ~ D_{q,B_V}^m, u = A s + e.
    Verifier(ProtocolParams params, Rng rng) : params_(std::move(params)), rng_(std::move(rng)) {
        keys_ = generate_keys(params_, rng_);
    }

    const ProtocolParams &params() const { return params_; }
    const VerifierKeys &keys() const { return keys_; }
    VerifierPhase phase() const { return phase_; }
    LweInstance public_instance() const { return keys_.public_instance(); }

    /// Steps 2-3: record y, return a uniform challenge bit.
    int receive_commitment(const ZqVector &y) {
        advance(VerifierPhase::Init, VerifierPhase::Committed);
        y_ = y;
        advance(VerifierPhase::Committed, VerifierPhase::Challenged);
        r_ = random_bit(rng_);
        return r_;
    }

    /// Steps 4-5.
    Verdict decide_response(const Response &response) {
        advance(VerifierPhase::Challenged, VerifierPhase::Decided);
        verdict_ = decide(params_, keys_.instance.A, keys_.instance.u, keys_.s(), keys_.trapdoor, y_, r_, response);
        return verdict_;
    }

    const ZqVector &commitment() const { return y_; }
    int challenge() const { return r_; }

   private:
    void advance(VerifierPhase from, VerifierPhase to) {
        if (phase_ != from) {
            throw UnsupportedOperation("verifier phase out of order");
        }
        phase_ = to;
    }

    ProtocolParams params_;
    Rng rng_;
    VerifierKeys keys_;
    VerifierPhase phase_ = VerifierPhase::Init;
    ZqVector y_;
    int r_ = 0;
    Verdict verdict_;
};

// ---- provers ------------------------------------------------------------------

class Prover {
   public:
    virtual ~Prover() = default;
    virtual std::string name() const = 0;
    virtual ZqVector commit(const LweInstance &pub, Rng &rng) = 0;
    virtual Response respond(int r, Rng &rng) = 0;

    /// Copy of the prover's state after commit, for rewinding.
    virtual std::unique_ptr<Prover> snapshot() const {
        throw UnsupportedOperation(name() + " prover does not support snapshots");
    }
    /// True when snapshot() clones a simulated quantum state.
    virtual bool snapshot_is_simulation() const { return false; }
};

enum class QuantumRoute { Structured, Explicit };

/// Honest prover: prepares |Phi>, measures the last register to commit, then
/// measures (b, x) for r = 0 or applies Hadamards and measures for r = 1.
///
/// The structured route samples y and the collapsed state exactly without
/// building |Phi> (see commit_structured); preimages are enumerated when q^n
/// is small and otherwise found with `helper`, the verifier's trapdoor used
/// as a simulation shortcut. The explicit route builds |Phi>.
class QuantumProver : public Prover {
   public:
    QuantumProver(ProtocolParams params, const GadgetTrapdoor *helper = nullptr,
                  QuantumRoute route = QuantumRoute::Structured)
        : params_(std::move(params)), helper_(helper), route_(route) {}

    std::string name() const override { return "quantum"; }

    ZqVector commit(const LweInstance &pub, Rng &rng) override {
        const int r = params_.interval_exponent();
        if (route_ == QuantumRoute::Explicit) {
            auto phi = prepare_Phi(pub, params_, {.override_preconditions = true, .trapdoor = helper_}).state;
            auto out = measure_last_register(phi, rng);
            collapsed_ = std::move(out.collapsed);
            return out.y;
        }
        const RobustStateSpec spec(pub.m(), pub.q(), r);
        const PreimageFinder finder(pub, spec, helper_);
        used_helper_ = finder.method() == PreimageMethod::Trapdoor;
        auto c = commit_structured(pub, finder, spec, rng);
        collapsed_ = std::move(c.collapsed);
        return c.y;
    }

    Response respond(int r, Rng &rng) override {
        if (!collapsed_) {
            throw UnsupportedOperation("quantum prover must commit before responding");
        }
        if (r == 0) {
            auto o = measure_committed_basis(*collapsed_, rng);
            return PreimageResponse{o.b, o.x};
        }
        auto h = hadamard_measure(*collapsed_, rng);
        return EquationResponse{h.c, h.d};
    }

    std::unique_ptr<Prover> snapshot() const override { return std::make_unique<QuantumProver>(*this); }
    bool snapshot_is_simulation() const override { return true; }

    const std::optional<SparseState> &collapsed() const { return collapsed_; }
    bool used_helper() const { return used_helper_; }

   private:
    ProtocolParams params_;
    const GadgetTrapdoor *helper_;
    QuantumRoute route_;
    std::optional<SparseState> collapsed_;
    bool used_helper_ = false;
};

/// Commits to y = A x for uniform x; r = 0 -> (0, x); r = 1 -> random c and
/// uniform d conditioned on d in G_{0,x}.
class PassR0Prover : public Prover {
   public:
    std::string name() const override { return "pass_r0"; }

    ZqVector commit(const LweInstance &pub, Rng &rng) override {
        x_ = ZqVector::uniform(pub.q(), static_cast<std::size_t>(pub.n()), rng);
        return pub.A * x_;
    }

    Response respond(int r, Rng &rng) override {
        if (r == 0) {
            return PreimageResponse{0, x_};
        }
        const int c = random_bit(rng);
        const std::size_t bits = x_.size() * static_cast<std::size_t>(bit_length(x_.modulus()));
        Bits d;
        do {
            d = random_bits(bits, rng);
        } while (!in_G_bx(d, 0, x_));
        return EquationResponse{c, d};
    }

    std::unique_ptr<Prover> snapshot() const override { return std::make_unique<PassR0Prover>(*this); }

    static Bits random_bits(std::size_t n, Rng &rng) {
        Bits d(n);
        for (auto &v : d) {
            v = static_cast<std::uint8_t>(random_bit(rng));
        }
        return d;
    }

   private:
    ZqVector x_;
};

/// Every message uniform.
class RandomProver : public Prover {
   public:
    std::string name() const override { return "random"; }

    ZqVector commit(const LweInstance &pub, Rng &rng) override {
        n_ = static_cast<std::size_t>(pub.n());
        q_ = pub.q();
        return ZqVector::uniform(pub.q(), static_cast<std::size_t>(pub.m()), rng);
    }

    Response respond(int r, Rng &rng) override {
        if (r == 0) {
            const int b = random_bit(rng);
            return PreimageResponse{b, ZqVector::uniform(q_, n_, rng)};
        }
        const int c = random_bit(rng);
        return EquationResponse{c, PassR0Prover::random_bits(n_ * static_cast<std::size_t>(bit_length(q_)), rng)};
    }

    std::unique_ptr<Prover> snapshot() const override { return std::make_unique<RandomProver>(*this); }

   private:
    std::size_t n_ = 0;
    Int q_ = 2;
};

/// Colludes with the verifier: knows s and the decoder, so it answers both
/// challenges correctly for the x0 the verifier will recover.
class OracleProver : public Prover {
   public:
    explicit OracleProver(const VerifierKeys &keys) : keys_(&keys) {}

    std::string name() const override { return "oracle"; }

    ZqVector commit(const LweInstance &pub, Rng &rng) override {
        const ZqVector x = ZqVector::uniform(pub.q(), static_cast<std::size_t>(pub.n()), rng);
        const ZqVector y = pub.A * x;
        x0_ = verifier_invert(keys_->instance.A, keys_->trapdoor, y);
        return y;
    }

    Response respond(int r, Rng &rng) override {
        if (r == 0) {
            return PreimageResponse{0, x0_};
        }
        const std::size_t bits = x0_.size() * static_cast<std::size_t>(bit_length(x0_.modulus()));
        Bits d;
        do {
            d = PassR0Prover::random_bits(bits, rng);
        } while (!in_G_sbx(d, keys_->s(), 0, x0_));
        return EquationResponse{equation_bit(d, x0_, x0_ - keys_->s()), d};
    }

    std::unique_ptr<Prover> snapshot() const override { return std::make_unique<OracleProver>(*this); }

   private:
    const VerifierKeys *keys_;
    ZqVector x0_;
};

enum class ProverKind { Quantum, PassR0, Random, Oracle };

inline const char *prover_kind_name(ProverKind k) {
    switch (k) {
        case ProverKind::Quantum:
            return "quantum";
        case ProverKind::PassR0:
            return "pass_r0";
        case ProverKind::Random:
            return "random";
        case ProverKind::Oracle:
            return "oracle";
    }
    return "?";
}

inline ProverKind prover_kind_from_name(const std::string &s) {
    for (ProverKind k : {ProverKind::Quantum, ProverKind::PassR0, ProverKind::Random, ProverKind::Oracle}) {
        if (s == prover_kind_name(k)) {
            return k;
        }
    }
    throw ParameterError("unknown prover '" + s + "' (expected quantum, pass_r0, random or oracle)");
}

inline std::unique_ptr<Prover> make_prover(ProverKind kind, const ProtocolParams &p, const VerifierKeys &keys) {
    switch (kind) {
        case ProverKind::Quantum:
            return std::make_unique<QuantumProver>(p, keys.trapdoor ? &*keys.trapdoor : nullptr);
        case ProverKind::PassR0:
            return std::make_unique<PassR0Prover>();
        case ProverKind::Random:
            return std::make_unique<RandomProver>();
        case ProverKind::Oracle:
            return std::make_unique<OracleProver>(keys);
    }
    throw ParameterError("unknown prover kind");
}

// ---- trials and transcripts ------------------------------------------------------

struct TrialRecord {
    std::uint64_t trial = 0;
    int r = 0;
    Verdict verdict;
    /// The five wire messages {"trial", "step", "payload"}.
    std::vector<Json> lines;
};

inline Json keys_reveal_json(const VerifierKeys &keys) {
    return Json{{"s", to_json(keys.s())},
                {"e", to_json(keys.e())},
                {"keygen", keygen_name(keys)},
                {"trapdoor", keys.trapdoor ? to_json(*keys.trapdoor) : Json(nullptr)}};
}

/// One run of the protocol. The verifier and prover draw from independent
/// streams derived from (master seed, role, trial).
inline TrialRecord run_trial(const ProtocolParams &p, ProverKind kind, std::uint64_t master_seed,
                             std::uint64_t trial) {
    Verifier v(p, make_stream(master_seed, "verifier", trial));
    Rng prng = make_stream(master_seed, "prover", trial);
    auto prover = make_prover(kind, p, v.keys());
    const LweInstance pub = v.public_instance();

    TrialRecord rec;
    rec.trial = trial;
    auto line = [&](int step, Json payload) {
        rec.lines.push_back(Json{{"trial", trial}, {"step", step}, {"payload", std::move(payload)}});
    };
    line(1, Json{{"A", to_json(pub.A)},
                 {"u", to_json(pub.u)},
                 {"params", to_json(p)},
                 {"prover", prover->name()},
                 {"seed", master_seed}});
    const ZqVector y = prover->commit(pub, prng);
    line(2, Json{{"y", to_json(y)}});
    rec.r = v.receive_commitment(y);
    line(3, Json{{"r", rec.r}});
    const Response resp = prover->respond(rec.r, prng);
    line(4, to_json(resp));
    rec.verdict = v.decide_response(resp);
    Json verdict{{"accept", rec.verdict.accept},
                 {"reason", reason_name(rec.verdict.reason)},
                 {"x0", rec.verdict.x0 ? to_json(*rec.verdict.x0) : Json(nullptr)}};
    verdict.update(keys_reveal_json(v.keys()));
    if (const auto *qp = dynamic_cast<const QuantumProver *>(prover.get())) {
        verdict["prover_used_trapdoor"] = qp->used_helper();
    }
    line(5, std::move(verdict));
    return rec;
}

struct ChallengeStats {
    std::size_t count = 0;
    std::size_t accepts = 0;
    double rate() const { return count ? static_cast<double>(accepts) / static_cast<double>(count) : 0.0; }
};

struct PassRateStats {
    std::size_t trials = 0;
    std::size_t accepts = 0;
    double rate = 0;
    double ci_low = 0;
    double ci_high = 0;
    ChallengeStats per_challenge[2];
    std::map<std::string, std::size_t> reasons;
};

/// Wilson score interval at z = 1.96.
inline std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) {
        return {0.0, 1.0};
    }
    const double N = static_cast<double>(n);
    const double phat = static_cast<double>(successes) / N;
    const double denom = 1 + z * z / N;
    const double centre = (phat + z * z / (2 * N)) / denom;
    const double half = z * std::sqrt(phat * (1 - phat) / N + z * z / (4 * N * N)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline Json to_json(const PassRateStats &s) {
    Json reasons = Json::object();
    for (const auto &[k, v] : s.reasons) {
        reasons[k] = v;
    }
    auto ch = [](const ChallengeStats &c) { return Json{{"count", c.count}, {"accepts", c.accepts}, {"rate", c.rate()}}; };
    return Json{{"trials", s.trials},
                {"accepts", s.accepts},
                {"rate", s.rate},
                {"ci95", {s.ci_low, s.ci_high}},
                {"per_challenge", {{"r0", ch(s.per_challenge[0])}, {"r1", ch(s.per_challenge[1])}}},
                {"reasons", reasons}};
}

/// Runs trials 0..trials-1 on `threads` workers. Transcript lines go to `sink`
/// (if any) in trial order, so output is independent of the thread count.
inline PassRateStats estimate_pass_rate(const ProtocolParams &p, ProverKind kind, std::size_t trials,
                                        std::uint64_t master_seed, unsigned threads = 1, std::ostream *sink = nullptr) {
    if (trials < 1) {
        throw ParameterError("estimate_pass_rate needs at least one trial");
    }
    threads = std::max(1u, threads);
    PassRateStats stats;
    const std::size_t batch = 512;
    for (std::size_t start = 0; start < trials; start += batch) {
        const std::size_t end = std::min(trials, start + batch);
        std::vector<TrialRecord> recs(end - start);
        std::atomic<std::size_t> next{start};
        std::exception_ptr failure;
        std::mutex failure_mu;
        auto worker = [&] {
            for (std::size_t t = next++; t < end; t = next++) {
                try {
                    recs[t - start] = run_trial(p, kind, master_seed, t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned w = 1; w < threads; ++w) {
            pool.emplace_back(worker);
        }
        worker();
        for (auto &t : pool) {
            t.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
        for (auto &rec : recs) {
            ++stats.trials;
            stats.accepts += rec.verdict.accept;
            auto &ch = stats.per_challenge[rec.r];
            ++ch.count;
            ch.accepts += rec.verdict.accept;
            ++stats.reasons[reason_name(rec.verdict.reason)];
            if (sink) {
                for (const auto &l : rec.lines) {
                    *sink << l.dump() << '\n';
                }
            }
        }
    }
    stats.rate = static_cast<double>(stats.accepts) / static_cast<double>(stats.trials);
    std::tie(stats.ci_low, stats.ci_high) = wilson_interval(stats.accepts, stats.trials);
    return stats;
}

// ---- replay ---------------------------------------------------------------------

struct ReplayMismatch {
    std::uint64_t trial = 0;
    std::string detail;
};

struct ReplayReport {
    std::size_t trials = 0;
    std::size_t accepted = 0;
    std::size_t reverified_r1 = 0;  // accepted r = 1 trials whose three conditions were re-checked
    std::vector<ReplayMismatch> mismatches;
    bool ok() const { return mismatches.empty(); }
};

inline Json to_json(const ReplayReport &r) {
    Json mm = Json::array();
    for (const auto &m : r.mismatches) {
        mm.push_back(Json{{"trial", m.trial}, {"detail", m.detail}});
    }
    return Json{{"trials", r.trials},
                {"accepted", r.accepted},
                {"reverified_r1", r.reverified_r1},
                {"mismatches", mm},
                {"ok", r.ok()}};
}

/// Re-derives each trial's verdict from the logged messages and the secrets
/// revealed at step 5, and compares it with the logged verdict.
inline ReplayReport replay_transcripts(std::istream &in) {
    std::map<std::uint64_t, std::map<int, Json>> trials;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error &err) {
            throw ParameterError("transcript line " + std::to_string(lineno) + ": " + err.what());
        }
        const auto trial = get_field(j, "trial", "transcript line").get<std::uint64_t>();
        const int step = get_field(j, "step", "transcript line").get<int>();
        if (step < 1 || step > 5) {
            throw ParameterError("transcript line " + std::to_string(lineno) + ": step must be 1..5");
        }
        trials[trial][step] = get_field(j, "payload", "transcript line");
    }
    ReplayReport rep;
    for (const auto &[trial, steps] : trials) {
        ++rep.trials;
        auto fail = [&, t = trial](const std::string &d) { rep.mismatches.push_back({t, d}); };
        if (steps.size() != 5) {
            fail("incomplete transcript (" + std::to_string(steps.size()) + " of 5 steps)");
            continue;
        }
        try {
            const Json &s1 = steps.at(1);
            const Json &s5 = steps.at(5);
            const ProtocolParams p = params_from_json(get_field(s1, "params", "step 1"));
            const ZqMatrix A = matrix_from_json(get_field(s1, "A", "step 1"));
            const ZqVector u = vector_from_json(get_field(s1, "u", "step 1"));
            const ZqVector y = vector_from_json(get_field(steps.at(2), "y", "step 2"));
            const int r = get_field(steps.at(3), "r", "step 3").get<int>();
            const Response resp = response_from_json(steps.at(4));
            const ZqVector s = vector_from_json(get_field(s5, "s", "step 5"));
            const ZqVector e = vector_from_json(get_field(s5, "e", "step 5"));
            std::optional<GadgetTrapdoor> t;
            if (!get_field(s5, "trapdoor", "step 5").is_null()) {
                t = trapdoor_from_json(s5["trapdoor"]);
                if (!trapdoor_matches(A, *t)) {
                    fail("revealed trapdoor does not match A");
                    continue;
                }
            }
            if (!(A * s + e == u)) {
                fail("revealed (s, e) inconsistent with u");
                continue;
            }
            const Verdict v = decide(p, A, u, s, t, y, r, resp);
            const bool logged_accept = get_field(s5, "accept", "step 5").get<bool>();
            const Reason logged_reason = reason_from_name(get_field(s5, "reason", "step 5").get<std::string>());
            if (v.accept != logged_accept || v.reason != logged_reason) {
                fail(std::string("verdict differs: replayed ") + reason_name(v.reason) + ", logged " +
                     reason_name(logged_reason));
                continue;
            }
            const Json &lx0 = get_field(s5, "x0", "step 5");
            if (v.x0.has_value() != !lx0.is_null() || (v.x0 && !(vector_from_json(lx0) == *v.x0))) {
                fail("inverted commitment differs from the logged x0");
                continue;
            }
            rep.accepted += v.accept;
            if (v.accept && r == 1) {
                // The three conditions, literally, on the logged values.
                const auto &eq = std::get<EquationResponse>(resp);
                const ZqVector x0 = vector_from_json(lx0);
                const bool bound = within_radius(A * x0 - y, p.accept_radius());
                const bool equation = eq.c == equation_bit(eq.d, x0, x0 - s);
                const bool good = in_G_sbx(eq.d, s, 0, x0);
                if (!(bound && equation && good)) {
                    fail("accepted r=1 transcript violates a verifier condition");
                    continue;
                }
                ++rep.reverified_r1;
            }
        } catch (const Error &err) {
            fail(std::string("malformed transcript: ") + err.what());
        } catch (const Json::exception &err) {
            fail(std::string("malformed transcript: ") + err.what());
        }
    }
    return rep;
}

// ---- rewinding extractor -------------------------------------------------------------

struct Extraction {
    HardcoreTuple tuple;
    ZqVector y;
    TupleClass label = TupleClass::Neither;
    /// Set when rewinding cloned a simulated quantum state.
    bool simulation_only = false;
};

/// Commit, snapshot, answer r = 0 to get (b, x), rewind to the snapshot and
/// answer r = 1 to get (c, d).
inline Extraction extract_hardcore_tuple(Prover &prover, const VerifierKeys &keys, Rng &rng) {
    const LweInstance pub = keys.public_instance();
    Extraction out;
    out.y = prover.commit(pub, rng);
    auto rewound = prover.snapshot();
    out.simulation_only = prover.snapshot_is_simulation();
    const Response r0 = prover.respond(0, rng);
    const Response r1 = rewound->respond(1, rng);
    const auto &pre = std::get<PreimageResponse>(r0);
    const auto &eq = std::get<EquationResponse>(r1);
    out.tuple = HardcoreTuple{pre.b, pre.x, eq.d, eq.c};
    out.label = classify_tuple(out.tuple, keys.s());
    return out;
}

struct ExtractionStats {
    std::size_t trials = 0;
    std::size_t in_h = 0;
    std::size_t in_hbar = 0;
    std::size_t neither = 0;
    bool simulation_only = false;
    double in_h_rate() const { return trials ? static_cast<double>(in_h) / static_cast<double>(trials) : 0.0; }
};

inline Json to_json(const ExtractionStats &s) {
    return Json{{"trials", s.trials},   {"InH", s.in_h},
                {"InHbar", s.in_hbar},  {"Neither", s.neither},
                {"InH_rate", s.in_h_rate()}, {"simulation_only", s.simulation_only}};
}

inline ExtractionStats run_extraction(const ProtocolParams &p, ProverKind kind, std::size_t trials,
                                      std::uint64_t master_seed) {
    ExtractionStats st;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng vrng = make_stream(master_seed, "extract_verifier", t);
        const VerifierKeys keys = generate_keys(p, vrng);
        auto prover = make_prover(kind, p, keys);
        Rng prng = make_stream(master_seed, "extract_prover", t);
        const auto ex = extract_hardcore_tuple(*prover, keys, prng);
        ++st.trials;
        st.simulation_only = st.simulation_only || ex.simulation_only;
        switch (ex.label) {
            case TupleClass::InH:
                ++st.in_h;
                break;
            case TupleClass::InHbar:
                ++st.in_hbar;
                break;
            case TupleClass::Neither:
                ++st.neither;
                break;
        }
    }
    return st;
}

}  // namespace qlwe
