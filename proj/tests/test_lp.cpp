#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "cslab/lp.hpp"
#include "cslab/prng.hpp"
#include "support/oracles.hpp"

using namespace cslab;

TEST_CASE("trivial pinned variable") {
    // min x s.t. x = 3, x free
    StandardLP lp;
    lp.cost = {1.0};
    lp.eq_matrix = RealMatrix(1, 1);
    lp.eq_matrix(0, 0) = 1.0;
    lp.eq_rhs = {3.0};
    lp.bounds = {VarBound::free_var};
    IpSolution sol = ip_solve(lp);
    REQUIRE(sol.status == SolveStatus::optimal);
    REQUIRE(sol.x[0] == Catch::Approx(3.0).margin(1e-8));
    REQUIRE(sol.duality_gap <= 1e-9);
}

TEST_CASE("scalar l1 epigraph") {
    // min u s.t. -u <= g <= u, g = 1  ->  (g, u) = (1, 1)
    // encoded over nonnegative s1 = u - g, s2 = u + g
    StandardLP lp;
    lp.cost = {0.5, 0.5};  // u = (s1 + s2) / 2
    lp.eq_matrix = RealMatrix(1, 2);
    lp.eq_matrix(0, 0) = -0.5;  // g = (s2 - s1) / 2
    lp.eq_matrix(0, 1) = 0.5;
    lp.eq_rhs = {1.0};
    lp.bounds = {VarBound::nonnegative, VarBound::nonnegative};
    IpSolution sol = ip_solve(lp);
    REQUIRE(sol.status == SolveStatus::optimal);
    const double g = 0.5 * (sol.x[1] - sol.x[0]);
    const double u = 0.5 * (sol.x[1] + sol.x[0]);
    REQUIRE(g == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(u == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("random small LPs match exhaustive vertex enumeration") {
    CounterRng rng(Seed{101, 0});
    int solved = 0;
    for (int inst = 0; inst < 40; ++inst) {
        const std::size_t m = 2 + inst % 3;       // 2..4 rows
        const std::size_t n = m + 2 + inst % 5;   // up to 10 variables
        RealMatrix a(m, n);
        for (auto& v : a.data()) v = rng.next_gaussian();
        if (pivoted_qr_rank(a, 1e-10).rank < m) continue;
        Vector x_feas(n);
        for (auto& v : x_feas) v = std::abs(rng.next_gaussian());
        Vector b = matvec(a, x_feas);
        Vector c(n);
        for (auto& v : c) v = 0.1 + std::abs(rng.next_gaussian());

        StandardLP lp;
        lp.cost = c;
        lp.eq_matrix = a;
        lp.eq_rhs = b;
        lp.bounds.assign(n, VarBound::nonnegative);
        IpSolution sol = ip_solve(lp);
        REQUIRE(sol.status == SolveStatus::optimal);

        auto oracle_obj = oracle::vertex_enumeration_lp(a, b, c);
        REQUIRE(oracle_obj.has_value());
        REQUIRE(std::abs(sol.objective - *oracle_obj) <= 1e-7 * (1.0 + std::abs(*oracle_obj)));
        ++solved;
    }
    REQUIRE(solved >= 35);
}

TEST_CASE("optimal exits satisfy the residual contract") {
    CounterRng rng(Seed{102, 0});
    for (int inst = 0; inst < 10; ++inst) {
        const std::size_t m = 5, n = 12;
        RealMatrix a(m, n);
        for (auto& v : a.data()) v = rng.next_gaussian();
        Vector x_feas(n);
        for (auto& v : x_feas) v = std::abs(rng.next_gaussian());
        Vector b = matvec(a, x_feas);
        Vector c(n);
        for (auto& v : c) v = 0.1 + std::abs(rng.next_gaussian());
        StandardLP lp{c, a, b, std::vector<VarBound>(n, VarBound::nonnegative), std::nullopt};
        IpSolution sol = ip_solve(lp);
        REQUIRE(sol.status == SolveStatus::optimal);
        REQUIRE(sol.primal_residual <= 1e-9);
        REQUIRE(sol.dual_residual <= 1e-9);
        REQUIRE(sol.duality_gap <= 1e-9);
        // primal feasibility recomputed externally
        Vector reached = matvec(a, sol.x);
        double pr = 0.0;
        for (std::size_t i = 0; i < m; ++i) pr += (reached[i] - b[i]) * (reached[i] - b[i]);
        REQUIRE(std::sqrt(pr) / (1.0 + norm2(b)) <= 1e-8);
    }
}

TEST_CASE("free variables combine with nonnegative ones") {
    // min 2a + |g| style toy: min 2a + u encoded with a free g
    // constraints: a + g = 1, a >= 0, g free; optimum at a = 0, g = 1 when
    // cost of g is below that of a
    StandardLP lp;
    lp.cost = {2.0, 1.0};
    lp.eq_matrix = RealMatrix(1, 2);
    lp.eq_matrix(0, 0) = 1.0;
    lp.eq_matrix(0, 1) = 1.0;
    lp.eq_rhs = {1.0};
    lp.bounds = {VarBound::nonnegative, VarBound::free_var};
    IpSolution sol = ip_solve(lp);
    REQUIRE(sol.status == SolveStatus::optimal);
    REQUIRE(sol.objective == Catch::Approx(1.0).margin(1e-7));
    REQUIRE(sol.x[0] == Catch::Approx(0.0).margin(1e-7));
    REQUIRE(sol.x[1] == Catch::Approx(1.0).margin(1e-7));
}

TEST_CASE("box blocks bound the response") {
    // min x1 + x2 s.t. |x1 + x2 - 4| <= 1  ->  optimum 3
    StandardLP lp;
    lp.cost = {1.0, 1.0};
    lp.eq_matrix = RealMatrix(0, 2);
    lp.eq_rhs = {};
    lp.bounds = {VarBound::nonnegative, VarBound::nonnegative};
    BoxBlock box;
    box.matrix = RealMatrix(1, 2);
    box.matrix(0, 0) = 1.0;
    box.matrix(0, 1) = 1.0;
    box.center = {4.0};
    box.radius = 1.0;
    lp.box = box;
    IpSolution sol = ip_solve(lp);
    REQUIRE(sol.status == SolveStatus::optimal);
    REQUIRE(sol.objective == Catch::Approx(3.0).margin(1e-7));
}

TEST_CASE("iteration cap surfaces as max_iterations") {
    CounterRng rng(Seed{103, 0});
    const std::size_t m = 4, n = 10;
    RealMatrix a(m, n);
    for (auto& v : a.data()) v = rng.next_gaussian();
    Vector x_feas(n);
    for (auto& v : x_feas) v = std::abs(rng.next_gaussian());
    Vector b = matvec(a, x_feas);
    Vector c(n);
    for (auto& v : c) v = 0.1 + std::abs(rng.next_gaussian());
    StandardLP lp{c, a, b, std::vector<VarBound>(n, VarBound::nonnegative), std::nullopt};
    IpOptions opts;
    opts.max_iterations = 1;
    IpSolution sol = ip_solve(lp, opts);
    REQUIRE(sol.status == SolveStatus::max_iterations);
}

TEST_CASE("lp text dump names every section") {
    StandardLP lp;
    lp.cost = {1.0, -2.0};
    lp.eq_matrix = RealMatrix(1, 2);
    lp.eq_matrix(0, 0) = 1.0;
    lp.eq_matrix(0, 1) = 3.0;
    lp.eq_rhs = {4.0};
    lp.bounds = {VarBound::nonnegative, VarBound::free_var};
    std::stringstream ss;
    write_lp_text(ss, lp);
    const std::string text = ss.str();
    REQUIRE(text.find("minimize") != std::string::npos);
    REQUIRE(text.find("subject to") != std::string::npos);
    REQUIRE(text.find("x1 free") != std::string::npos);
    REQUIRE(text.find("x0 >= 0") != std::string::npos);
}
