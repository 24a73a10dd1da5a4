#include "gridres/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gridres {

BranchAdmittance branch_admittance(const Branch& br) {
    const Complex ys = 1.0 / Complex(br.resistance, br.reactance);
    const Complex half_b(0.0, br.charging / 2.0);
    const double t = br.is_transformer ? br.tap : 1.0;
    return {(ys + half_b) / (t * t), -ys / t, -ys / t, ys + half_b};
}

Eigen::MatrixXcd build_ybus(const Network& net) {
    const auto n = static_cast<Eigen::Index>(net.buses.size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& br : net.branches) {
        if (!br.in_service()) continue;
        auto f = static_cast<Eigen::Index>(net.bus_index(br.from_bus));
        auto t = static_cast<Eigen::Index>(net.bus_index(br.to_bus));
        auto a = branch_admittance(br);
        y(f, f) += a.yff;
        y(f, t) += a.yft;
        y(t, f) += a.ytf;
        y(t, t) += a.ytt;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& b = net.buses[static_cast<std::size_t>(i)];
        y(i, i) += Complex(b.shunt_g_mw, b.shunt_b_mvar) / net.base_mva;
    }
    return y;
}

std::size_t select_slack(const Network& net, const Island& island) {
    std::size_t best = island.buses.front();
    double best_cap = -1.0;
    for (auto b : island.buses) {
        double cap = 0.0;
        bool any = false;
        for (auto g : island.generators)
            if (net.bus_index(net.generators[g].bus) == b && net.generators[g].online()) {
                cap += net.generators[g].p_max;
                any = true;
            }
        if (!any) continue;
        if (cap > best_cap || (cap == best_cap && net.buses[b].id < net.buses[best].id)) {
            best = b;
            best_cap = cap;
        }
    }
    return best;
}

std::vector<Complex> PowerFlowSolution::voltages() const {
    std::vector<Complex> v(vm.size());
    for (std::size_t i = 0; i < vm.size(); ++i) v[i] = std::polar(vm[i], va[i]);
    return v;
}

namespace {

enum class Role { pq, pv, slack };

IslandSolve solve_island(const Network& net, const Eigen::MatrixXcd& ybus_full,
                         std::size_t island_id, const Island& island,
                         const std::vector<double>& p_gen_bus, const std::vector<double>& pd,
                         const std::vector<double>& qd, const std::vector<bool>& has_gen,
                         const PowerFlowOptions& opts, std::vector<double>& vm,
                         std::vector<double>& va) {
    IslandSolve res;
    res.island = island_id;
    res.slack_bus = select_slack(net, island);

    const auto& ib = island.buses;
    const auto n = static_cast<Eigen::Index>(ib.size());
    Eigen::MatrixXcd y(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            y(r, c) = ybus_full(static_cast<Eigen::Index>(ib[r]), static_cast<Eigen::Index>(ib[c]));

    std::vector<Role> role(ib.size());
    std::vector<Eigen::Index> pvpq, pq;
    Eigen::VectorXcd sspec(n);
    Eigen::VectorXcd v(n);
    const bool warm = opts.initial_vm.size() == net.buses.size() &&
                      opts.initial_va.size() == net.buses.size();
    for (Eigen::Index k = 0; k < n; ++k) {
        const std::size_t b = ib[static_cast<std::size_t>(k)];
        role[k] = b == res.slack_bus ? Role::slack : (has_gen[b] ? Role::pv : Role::pq);
        if (role[k] != Role::slack) pvpq.push_back(k);
        if (role[k] == Role::pq) pq.push_back(k);
        sspec(k) = Complex(p_gen_bus[b] - pd[b], -qd[b]) / net.base_mva;
        double mag = role[k] == Role::pq ? 1.0 : net.buses[b].voltage_setpoint;
        double ang = 0.0;
        if (warm && opts.initial_vm[b] > 0.0) {
            if (role[k] == Role::pq) mag = opts.initial_vm[b];
            ang = opts.initial_va[b];
        }
        v(k) = std::polar(mag, ang);
    }
    // Keep the slack angle at its warm-start value (zero for flat starts).
    const auto npvpq = static_cast<Eigen::Index>(pvpq.size());
    const auto npq = static_cast<Eigen::Index>(pq.size());

    // On failure the lowest-mismatch iterate is reported; callers use it to
    // locate the weak part of the island.
    Eigen::VectorXcd best_v = v;
    double best_mis = std::numeric_limits<double>::infinity();
    for (int it = 0;; ++it) {
        Eigen::VectorXcd ibus = y * v;
        Eigen::VectorXcd mis(n);
        for (Eigen::Index k = 0; k < n; ++k) mis(k) = v(k) * std::conj(ibus(k)) - sspec(k);
        Eigen::VectorXd f(npvpq + npq);
        for (Eigen::Index i = 0; i < npvpq; ++i) f(i) = mis(pvpq[i]).real();
        for (Eigen::Index i = 0; i < npq; ++i) f(npvpq + i) = mis(pq[i]).imag();
        res.max_mismatch = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
        if (!std::isfinite(res.max_mismatch)) {
            res.error = "diverged";
            break;
        }
        if (res.max_mismatch < best_mis) {
            best_mis = res.max_mismatch;
            best_v = v;
        }
        if (res.max_mismatch <= opts.tolerance) {
            res.converged = true;
            break;
        }
        if (it >= opts.max_iterations) break;

        // dS/dVa = j diag(V) conj(diag(I) - Y diag(V));
        // dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|).
        Eigen::MatrixXd jac(npvpq + npq, npvpq + npq);
        auto dsdva = [&](Eigen::Index r, Eigen::Index c) {
            Complex term = (r == c ? ibus(r) : Complex(0.0)) - y(r, c) * v(c);
            return Complex(0.0, 1.0) * v(r) * std::conj(term);
        };
        auto dsdvm = [&](Eigen::Index r, Eigen::Index c) {
            Complex vn = v(c) / std::abs(v(c));
            Complex s = v(r) * std::conj(y(r, c) * vn);
            if (r == c) s += std::conj(ibus(r)) * vn;
            return s;
        };
        for (Eigen::Index i = 0; i < npvpq; ++i) {
            for (Eigen::Index j = 0; j < npvpq; ++j) jac(i, j) = dsdva(pvpq[i], pvpq[j]).real();
            for (Eigen::Index j = 0; j < npq; ++j) jac(i, npvpq + j) = dsdvm(pvpq[i], pq[j]).real();
        }
        for (Eigen::Index i = 0; i < npq; ++i) {
            for (Eigen::Index j = 0; j < npvpq; ++j)
                jac(npvpq + i, j) = dsdva(pq[i], pvpq[j]).imag();
            for (Eigen::Index j = 0; j < npq; ++j)
                jac(npvpq + i, npvpq + j) = dsdvm(pq[i], pq[j]).imag();
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        if (!(lu.rcond() > 1e-14)) {
            res.error = "singular Jacobian in island " + std::to_string(island_id);
            break;
        }
        Eigen::VectorXd dx = lu.solve(-f);
        if (!dx.allFinite()) {
            res.error = "singular Jacobian in island " + std::to_string(island_id);
            break;
        }
        for (Eigen::Index i = 0; i < npvpq; ++i) {
            auto k = pvpq[i];
            v(k) = std::polar(std::abs(v(k)), std::arg(v(k)) + dx(i));
        }
        for (Eigen::Index i = 0; i < npq; ++i) {
            auto k = pq[i];
            v(k) = std::polar(std::abs(v(k)) + dx(npvpq + i), std::arg(v(k)));
        }
        res.iterations = it + 1;
    }
    if (!res.converged) {
        v = best_v;
        res.max_mismatch = best_mis;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        vm[ib[k]] = std::abs(v(k));
        va[ib[k]] = std::arg(v(k));
    }
    return res;
}

}  // namespace

PowerFlowSolution run_power_flow(const Network& net, const IslandSet& islands,
                                 const std::vector<BusDemand>& demand,
                                 const std::vector<double>& dispatch_mw,
                                 const PowerFlowOptions& opts) {
    if (dispatch_mw.size() != net.generators.size())
        throw InputError("dispatch must have one entry per generator");
    const std::size_t nb = net.buses.size();
    std::vector<double> pd(nb, 0.0), qd(nb, 0.0), pg(nb, 0.0);
    std::vector<bool> has_gen(nb, false);
    for (const auto& d : demand) {
        auto i = net.bus_index(d.bus);
        pd[i] += d.p_mw;
        qd[i] += d.q_mvar;
    }
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        if (!gen.online()) continue;
        auto i = net.bus_index(gen.bus);
        pg[i] += dispatch_mw[g];
        has_gen[i] = true;
    }

    const Eigen::MatrixXcd ybus = build_ybus(net);
    PowerFlowSolution sol;
    sol.vm.assign(nb, 0.0);
    sol.va.assign(nb, 0.0);
    sol.converged = true;
    for (std::size_t k = 0; k < islands.islands.size(); ++k) {
        const auto& isl = islands.islands[k];
        if (isl.dead) continue;
        auto r = solve_island(net, ybus, k, isl, pg, pd, qd, has_gen, opts, sol.vm, sol.va);
        sol.converged = sol.converged && r.converged;
        sol.iterations = std::max(sol.iterations, r.iterations);
        sol.max_mismatch = std::max(sol.max_mismatch, r.max_mismatch);
        sol.islands.push_back(r);
    }

    // Branch flows from the solved voltages.
    const auto v = sol.voltages();
    sol.flows.assign(net.branches.size(), {});
    std::vector<double> island_loss(islands.islands.size(), 0.0);
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        const auto& br = net.branches[b];
        if (!br.in_service()) continue;
        auto f = net.bus_index(br.from_bus);
        auto t = net.bus_index(br.to_bus);
        if (islands.islands[islands.island_of_bus[f]].dead) continue;
        auto a = branch_admittance(br);
        Complex sf = v[f] * std::conj(a.yff * v[f] + a.yft * v[t]) * net.base_mva;
        Complex st = v[t] * std::conj(a.ytf * v[f] + a.ytt * v[t]) * net.base_mva;
        sol.flows[b] = {sf.real(), sf.imag(), st.real(), st.imag()};
        island_loss[islands.island_of_bus[f]] += sf.real() + st.real();
    }
    for (std::size_t i = 0; i < nb; ++i)
        island_loss[islands.island_of_bus[i]] += net.buses[i].shunt_g_mw * sol.vm[i] * sol.vm[i];
    for (auto& r : sol.islands) {
        r.losses_mw = island_loss[r.island];
        sol.losses_mw += r.losses_mw;
    }

    // Generator outputs: dispatch as given except at the slack; reactive power
    // shared by reactive range at every bus with generation.
    const Eigen::MatrixXcd& y = ybus;
    std::vector<Complex> s_inj(nb, 0.0);
    for (std::size_t i = 0; i < nb; ++i) {
        if (sol.vm[i] == 0.0) continue;
        Complex ii = 0.0;
        for (std::size_t j = 0; j < nb; ++j)
            ii += y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * v[j];
        s_inj[i] = v[i] * std::conj(ii) * net.base_mva;
    }
    sol.gen_p.assign(net.generators.size(), 0.0);
    sol.gen_q.assign(net.generators.size(), 0.0);
    std::vector<bool> is_slack(nb, false);
    for (const auto& r : sol.islands) is_slack[r.slack_bus] = true;
    for (std::size_t i = 0; i < nb; ++i) {
        if (!has_gen[i] || sol.vm[i] == 0.0) continue;
        std::vector<std::size_t> units;
        double pmax_sum = 0.0, qrange_sum = 0.0;
        for (std::size_t g = 0; g < net.generators.size(); ++g) {
            const auto& gen = net.generators[g];
            if (!gen.online() || net.bus_index(gen.bus) != i) continue;
            units.push_back(g);
            pmax_sum += gen.p_max;
            qrange_sum += gen.q_max - gen.q_min;
        }
        const double p_bus = s_inj[i].real() + pd[i];
        const double q_bus = s_inj[i].imag() + qd[i];
        for (auto g : units) {
            const auto& gen = net.generators[g];
            double pw = pmax_sum > 0 ? gen.p_max / pmax_sum : 1.0 / units.size();
            double qw = qrange_sum > 0 ? (gen.q_max - gen.q_min) / qrange_sum : 1.0 / units.size();
            sol.gen_p[g] = is_slack[i] ? p_bus * pw : dispatch_mw[g];
            sol.gen_q[g] = q_bus * qw;
        }
    }
    return sol;
}

PowerFlowSolution run_power_flow(const Network& net, const std::vector<BusDemand>& demand,
                                 const std::vector<double>& dispatch_mw,
                                 const PowerFlowOptions& opts) {
    return run_power_flow(net, connected_islands(net), demand, dispatch_mw, opts);
}

}  // namespace gridres
