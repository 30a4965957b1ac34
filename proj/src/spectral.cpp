// Copyright 2026 The Hyperscar Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperscar/spectral.hpp"

#include "hyperscar/errors.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace hyperscar {

namespace {

void check_lapack(lapack_int info, const char* routine) {
    if (info != 0) {
        throw NumericalError(std::string(routine) + " failed with info = " + std::to_string(info));
    }
}

}  // namespace

EigenSystem diagonalize_dense(Eigen::MatrixXd matrix, bool vectors) {
    const auto n = matrix.rows();
    if (matrix.cols() != n) throw ContractError("diagonalize_dense: matrix is not square");
    EigenSystem es;
    es.energies.resize(n);
    es.sector.assign(static_cast<std::size_t>(n), -1);
    if (n == 0) return es;
    const auto ln = static_cast<lapack_int>(n);
    if (!vectors || n <= 2000) {
        check_lapack(LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'U', ln, matrix.data(), ln,
                                    es.energies.data()),
                     "dsyevd");
        if (vectors) es.vectors = std::move(matrix);
        return es;
    }
    // MRRR keeps the workspace linear in n for large blocks.
    es.vectors.resize(n, n);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    check_lapack(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', ln, matrix.data(), ln, 0.0, 0.0, 0, 0, 0.0, &found,
                                es.energies.data(), es.vectors.data(), ln, support.data()),
                 "dsyevr");
    if (found != ln) throw NumericalError("dsyevr returned " + std::to_string(found) + " of " + std::to_string(n) + " eigenpairs");
    return es;
}

EigenSystem diagonalize(const SparseHamiltonian& h, const DiagOptions& options) {
    if (h.dimension() > options.cap) {
        throw CapacityError("dense diagonalization of dimension " + std::to_string(h.dimension()) +
                            " exceeds the cap of " + std::to_string(options.cap) +
                            "; use symmetry-resolved blocks or Krylov dynamics instead");
    }
    return diagonalize_dense(h.to_dense(), options.vectors);
}

Eigen::MatrixXd symmetry_block(const SparseHamiltonian& h, const Eigen::SparseMatrix<double>& q) {
    const Eigen::SparseMatrix<double> hs = h.to_eigen();
    const Eigen::SparseMatrix<double> hq = hs * q;
    const Eigen::SparseMatrix<double> block = q.transpose() * hq;
    Eigen::MatrixXd dense(block);
    // Symmetrize away rounding from the projector normalisation.
    dense = 0.5 * (dense + dense.transpose()).eval();
    return dense;
}

EigenSystem diagonalize_resolved(const SparseHamiltonian& h, const BasisSector& sector, const SymmetryGroup& group,
                                 const DiagOptions& options) {
    if (sector.size() != h.dimension()) throw ContractError("diagonalize_resolved: sector does not match operator");
    struct Block {
        Eigen::SparseMatrix<double> q;
        EigenSystem es;
    };
    std::vector<Block> blocks;
    std::size_t total = 0;
    for (std::size_t b = 0; b < group.sector_count(); ++b) {
        Block blk;
        blk.q = group.projector(sector, b);
        if (static_cast<std::size_t>(blk.q.cols()) > options.cap) {
            throw CapacityError("symmetry block of dimension " + std::to_string(blk.q.cols()) + " exceeds the cap of " +
                                std::to_string(options.cap));
        }
        if (blk.q.cols() > 0) blk.es = diagonalize_dense(symmetry_block(h, blk.q), options.vectors);
        total += static_cast<std::size_t>(blk.q.cols());
        blocks.push_back(std::move(blk));
    }
    if (total != sector.size()) throw NumericalError("symmetry blocks do not span the sector");

    struct Ref {
        double e;
        std::size_t block;
        Eigen::Index col;
    };
    std::vector<Ref> refs;
    refs.reserve(total);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (Eigen::Index k = 0; k < blocks[b].es.energies.size(); ++k) refs.push_back({blocks[b].es.energies[k], b, k});
    }
    std::stable_sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) { return a.e < b.e; });

    EigenSystem out;
    const auto n = static_cast<Eigen::Index>(total);
    out.energies.resize(n);
    out.sector.resize(total);
    for (std::size_t b = 0; b < group.sector_count(); ++b) out.sector_labels.push_back(group.sector_label(b));
    std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> placement(blocks.size());
    for (Eigen::Index k = 0; k < n; ++k) {
        const Ref& r = refs[static_cast<std::size_t>(k)];
        out.energies[k] = r.e;
        out.sector[static_cast<std::size_t>(k)] = static_cast<int>(r.block);
        placement[r.block].emplace_back(r.col, k);
    }
    if (options.vectors) {
        out.vectors.resize(n, n);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (blocks[b].q.cols() == 0) continue;
            const Eigen::MatrixXd full = blocks[b].q * blocks[b].es.vectors;
            blocks[b].es.vectors.resize(0, 0);
            for (const auto& [src, dst] : placement[b]) out.vectors.col(dst) = full.col(src);
        }
    }
    return out;
}

EigenSystem diagonalize_window(const SparseHamiltonian& h, const BasisSector& sector, const SymmetryGroup& group,
                               std::size_t block, double lo, double hi, std::size_t cap) {
    if (!(lo < hi)) throw ContractError("diagonalize_window: empty energy window");
    const Eigen::SparseMatrix<double> q = group.projector(sector, block);
    const auto n = static_cast<lapack_int>(q.cols());
    if (static_cast<std::size_t>(n) > cap) throw CapacityError("symmetry block exceeds the dense cap");
    EigenSystem out;
    out.sector_labels.push_back(group.sector_label(block));
    if (n == 0) return out;
    Eigen::MatrixXd a = symmetry_block(h, q);

    // Tridiagonalize once, bisect the window, inverse-iterate, back-transform.
    std::vector<double> d(static_cast<std::size_t>(n));
    std::vector<double> e(static_cast<std::size_t>(std::max<lapack_int>(n - 1, 1)));
    std::vector<double> tau(static_cast<std::size_t>(std::max<lapack_int>(n - 1, 1)));
    check_lapack(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'U', n, a.data(), n, d.data(), e.data(), tau.data()), "dsytrd");
    lapack_int m = 0;
    lapack_int nsplit = 0;
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<lapack_int> iblock(static_cast<std::size_t>(n));
    std::vector<lapack_int> isplit(static_cast<std::size_t>(n));
    check_lapack(LAPACKE_dstebz('V', 'B', n, lo, hi, 0, 0, 0.0, d.data(), e.data(), &m, &nsplit, w.data(),
                                iblock.data(), isplit.data()),
                 "dstebz");
    out.energies = Eigen::Map<Eigen::VectorXd>(w.data(), m);
    out.sector.assign(static_cast<std::size_t>(m), static_cast<int>(block));
    if (m == 0) return out;
    Eigen::MatrixXd z(n, m);
    std::vector<lapack_int> ifail(static_cast<std::size_t>(m));
    check_lapack(LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), e.data(), m, w.data(), iblock.data(), isplit.data(),
                                z.data(), n, ifail.data()),
                 "dstein");
    check_lapack(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'U', 'N', n, m, a.data(), n, tau.data(), z.data(), n),
                 "dormtr");
    a.resize(0, 0);
    out.vectors = q * z;
    return out;
}

std::vector<EigenRecord> eigen_observables(const SparseHamiltonian& h, const BasisSector& sector,
                                           const SymmetryGroup& group, std::size_t probe_rank, const Bipartition* cut,
                                           std::size_t cap) {
    if (sector.size() != h.dimension()) throw ContractError("eigen_observables: sector does not match operator");
    if (probe_rank >= sector.size()) throw ContractError("eigen_observables: probe outside the sector");
    std::vector<EigenRecord> out;
    out.reserve(sector.size());
    for (std::size_t b = 0; b < group.sector_count(); ++b) {
        const Eigen::SparseMatrix<double> q = group.projector(sector, b);
        if (q.cols() == 0) continue;
        if (static_cast<std::size_t>(q.cols()) > cap) {
            throw CapacityError("symmetry block of dimension " + std::to_string(q.cols()) + " exceeds the cap of " +
                                std::to_string(cap) + "; use Krylov dynamics instead");
        }
        EigenSystem es = diagonalize_dense(symmetry_block(h, q), true);
        const Eigen::SparseMatrix<double, Eigen::RowMajor> qr = q;
        const Eigen::VectorXd probe_row = Eigen::VectorXd(qr.row(static_cast<Eigen::Index>(probe_rank)).transpose());
        const Eigen::VectorXd amp = es.vectors.transpose() * probe_row;
        Eigen::VectorXd v(static_cast<Eigen::Index>(sector.size()));
        for (Eigen::Index k = 0; k < es.energies.size(); ++k) {
            EigenRecord rec;
            rec.energy = es.energies[k];
            rec.sector = static_cast<int>(b);
            rec.overlap = amp[k] * amp[k];
            if (cut != nullptr) {
                v = q * es.vectors.col(k);
                rec.entropy = cut->entropy(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
            }
            out.push_back(rec);
        }
    }
    if (out.size() != sector.size()) throw NumericalError("symmetry blocks do not span the sector");
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
    return out;
}

std::vector<OverlapPoint> overlaps(std::size_t rank, const EigenSystem& es) {
    if (!es.has_vectors()) throw ContractError("overlaps need eigenvectors");
    if (rank >= static_cast<std::size_t>(es.vectors.rows())) throw ContractError("overlaps: rank outside the basis");
    std::vector<OverlapPoint> out(es.size());
    const auto row = static_cast<Eigen::Index>(rank);
    for (Eigen::Index k = 0; k < es.energies.size(); ++k) {
        const double c = es.vectors(row, k);
        out[static_cast<std::size_t>(k)] = {es.energies[k], c * c};
    }
    return out;
}

std::vector<OverlapPoint> overlaps(const FockState& s, const BasisSector& sector, const EigenSystem& es) {
    const auto r = sector.rank(s);
    if (!r) throw ContractError("overlaps: state " + s.to_string() + " is not in the sector");
    return overlaps(*r, es);
}

Bipartition::Bipartition(const BasisSector& sector, std::span<const int> cut) : dim_(sector.size()) {
    const int l = sector.sites();
    Bits mask_a = 0;
    for (int s : cut) {
        if (s < 0 || s >= l) throw ContractError("Bipartition: cut site out of range");
        mask_a |= Bits{1} << s;
    }
    const Bits mask_all = (Bits{1} << l) - 1;
    const Bits mask_b = mask_all & ~mask_a;
    if (mask_a == 0 || mask_b == 0) throw ContractError("Bipartition: cut must be a nonempty proper subset");
    size_a_ = static_cast<std::size_t>(std::popcount(mask_a));
    size_b_ = static_cast<std::size_t>(std::popcount(mask_b));

    auto compress = [](Bits s, Bits mask) {
        Bits out = 0;
        int k = 0;
        while (mask != 0) {
            const int i = std::countr_zero(mask);
            if ((s >> i) & 1U) out |= Bits{1} << k;
            ++k;
            mask &= mask - 1;
        }
        return out;
    };
    const int na_max = static_cast<int>(size_a_);
    std::vector<std::vector<Bits>> rows(static_cast<std::size_t>(na_max + 1));
    std::vector<std::vector<Bits>> cols(static_cast<std::size_t>(na_max + 1));
    std::vector<Bits> pa(dim_);
    std::vector<Bits> pb(dim_);
    const auto states = sector.states();
    for (std::size_t r = 0; r < dim_; ++r) {
        pa[r] = compress(states[r], mask_a);
        pb[r] = compress(states[r], mask_b);
        const auto k = static_cast<std::size_t>(std::popcount(pa[r]));
        rows[k].push_back(pa[r]);
        cols[k].push_back(pb[r]);
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        std::sort(rows[k].begin(), rows[k].end());
        rows[k].erase(std::unique(rows[k].begin(), rows[k].end()), rows[k].end());
        std::sort(cols[k].begin(), cols[k].end());
        cols[k].erase(std::unique(cols[k].begin(), cols[k].end()), cols[k].end());
        block_shape_.emplace_back(rows[k].size(), cols[k].size());
    }
    slots_.resize(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        const auto k = static_cast<std::size_t>(std::popcount(pa[r]));
        const auto i = std::lower_bound(rows[k].begin(), rows[k].end(), pa[r]) - rows[k].begin();
        const auto j = std::lower_bound(cols[k].begin(), cols[k].end(), pb[r]) - cols[k].begin();
        slots_[r] = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
    }
}

template <typename Scalar>
double Bipartition::entropy_impl(std::span<const Scalar> psi) const {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (psi.size() != dim_) throw ContractError("Bipartition::entropy: vector length does not match the sector");
    std::vector<Mat> blocks;
    blocks.reserve(block_shape_.size());
    for (const auto& [r, c] : block_shape_) {
        blocks.push_back(Mat::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    for (std::size_t k = 0; k < dim_; ++k) {
        const Slot& s = slots_[k];
        blocks[s.block](s.row, s.col) = psi[k];
    }
    double entropy = 0.0;
    for (const Mat& m : blocks) {
        if (m.size() == 0) continue;
        const Mat rho = m.rows() <= m.cols() ? Mat(m * m.adjoint()) : Mat(m.adjoint() * m);
        Eigen::SelfAdjointEigenSolver<Mat> solver(rho, Eigen::EigenvaluesOnly);
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
            const double p = solver.eigenvalues()[i];
            if (p > 1e-300) entropy -= p * std::log(p);
        }
    }
    return std::max(entropy, 0.0);
}

double Bipartition::entropy(std::span<const double> psi) const { return entropy_impl(psi); }

double Bipartition::entropy(std::span<const std::complex<double>> psi) const { return entropy_impl(psi); }

double eigenstate_entropy(std::span<const double> v, std::span<const int> cut, const BasisSector& sector) {
    return Bipartition(sector, cut).entropy(v);
}

GapRatioStats mean_gap_ratio(std::span<const double> levels) {
    GapRatioStats out;
    double sum = 0.0;
    for (std::size_t n = 0; n + 2 < levels.size(); ++n) {
        const double s0 = levels[n + 1] - levels[n];
        const double s1 = levels[n + 2] - levels[n + 1];
        const double hi = std::max(s0, s1);
        if (hi <= 0.0) continue;
        sum += std::min(s0, s1) / hi;
        ++out.ratios;
    }
    out.mean = out.ratios > 0 ? sum / static_cast<double>(out.ratios) : std::nan("");
    if (levels.size() < 100) {
        out.low_statistics = true;
        out.warning = "fewer than 100 levels; gap-ratio statistics are unreliable";
    }
    return out;
}

GapRatioStats level_spacing_ratio(const EigenSystem& es, bool resolve, const SymmetryGroup& group,
                                  const BasisSector& sector) {
    std::vector<double> all(es.energies.data(), es.energies.data() + es.energies.size());
    std::sort(all.begin(), all.end());
    if (!resolve || group.generator_count() == 0) {
        GapRatioStats out = mean_gap_ratio(all);
        out.per_sector.emplace_back("all", out.mean);
        return out;
    }

    const std::size_t nsec = group.sector_count();
    std::vector<std::vector<double>> bins(nsec);
    std::size_t discarded = 0;
    const bool exact = es.sector.size() == es.size() &&
                       std::all_of(es.sector.begin(), es.sector.end(), [](int s) { return s >= 0; });
    if (exact) {
        for (std::size_t k = 0; k < es.size(); ++k) {
            bins[static_cast<std::size_t>(es.sector[k])].push_back(es.energies[static_cast<Eigen::Index>(k)]);
        }
    } else {
        if (!es.has_vectors()) throw ContractError("symmetry resolution needs eigenvectors or sector labels");
        if (static_cast<std::size_t>(es.vectors.rows()) != sector.size()) {
            throw ContractError("eigenvectors do not live on the given sector");
        }
        const auto states = sector.states();
        std::vector<std::vector<std::size_t>> image(static_cast<std::size_t>(group.generator_count()));
        for (int g = 0; g < group.generator_count(); ++g) {
            auto& im = image[static_cast<std::size_t>(g)];
            im.resize(states.size());
            for (std::size_t r = 0; r < states.size(); ++r) {
                const auto k = sector.rank(group.apply_generator(g, states[r]));
                if (!k) throw ContractError("symmetry maps a state out of the sector");
                im[r] = *k;
            }
        }
        for (Eigen::Index k = 0; k < es.energies.size(); ++k) {
            std::size_t bin = 0;
            bool keep = true;
            for (int g = 0; g < group.generator_count() && keep; ++g) {
                double expect = 0.0;
                const auto& im = image[static_cast<std::size_t>(g)];
                for (std::size_t r = 0; r < im.size(); ++r) {
                    expect += es.vectors(static_cast<Eigen::Index>(r), k) * es.vectors(static_cast<Eigen::Index>(im[r]), k);
                }
                if (std::abs(expect) <= 0.99) keep = false;
                if (expect < 0.0) bin |= std::size_t{1} << g;
            }
            if (keep) {
                bins[bin].push_back(es.energies[k]);
            } else {
                ++discarded;
            }
        }
    }
    GapRatioStats out;
    double weighted = 0.0;
    for (std::size_t b = 0; b < nsec; ++b) {
        std::sort(bins[b].begin(), bins[b].end());
        const GapRatioStats part = mean_gap_ratio(bins[b]);
        out.per_sector.emplace_back(group.sector_label(b), part.mean);
        if (part.ratios > 0) {
            weighted += part.mean * static_cast<double>(part.ratios);
            out.ratios += part.ratios;
        }
        if (part.low_statistics) {
            out.low_statistics = true;
            out.warning = "sector '" + group.sector_label(b) + "' has fewer than 100 levels";
        }
    }
    if (discarded > 0) {
        if (!out.warning.empty()) out.warning += "; ";
        out.warning += std::to_string(discarded) + " eigenvectors without definite symmetry discarded";
    }
    out.mean = out.ratios > 0 ? weighted / static_cast<double>(out.ratios) : std::nan("");
    return out;
}

std::vector<Tower> extract_towers(std::span<const OverlapPoint> points, const TowerOptions& options) {
    std::vector<OverlapPoint> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
    const double win = options.window;

    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].weight < options.threshold) continue;
        bool is_max = true;
        for (std::size_t j = i; j-- > 0 && pts[i].energy - pts[j].energy <= win;) {
            if (pts[j].weight >= pts[i].weight) {
                is_max = false;
                break;
            }
        }
        for (std::size_t j = i + 1; is_max && j < pts.size() && pts[j].energy - pts[i].energy <= win; ++j) {
            if (pts[j].weight > pts[i].weight) is_max = false;
        }
        if (is_max) peaks.push_back(i);
    }

    std::vector<Tower> towers;
    for (std::size_t p : peaks) {
        Tower t;
        t.peak_energy = pts[p].energy;
        t.peak_weight = pts[p].weight;
        towers.push_back(t);
    }
    std::vector<double> moment(towers.size(), 0.0);
    for (const OverlapPoint& pt : pts) {
        if (pt.weight < options.threshold || towers.empty()) continue;
        std::size_t best = 0;
        double dist = std::abs(pt.energy - towers[0].peak_energy);
        for (std::size_t k = 1; k < towers.size(); ++k) {
            const double d = std::abs(pt.energy - towers[k].peak_energy);
            if (d < dist) {
                dist = d;
                best = k;
            }
        }
        if (dist > win) continue;
        towers[best].weight += pt.weight;
        moment[best] += pt.weight * pt.energy;
        ++towers[best].members;
    }
    for (std::size_t k = 0; k < towers.size(); ++k) towers[k].center = moment[k] / towers[k].weight;
    if (options.satellite > 0.0 && towers.size() >= 3) {
        const std::size_t n = towers.size();
        std::vector<double> left(n, 0.0), right(n, 0.0);
        for (std::size_t k = 1; k < n; ++k) left[k] = std::max(left[k - 1], towers[k - 1].weight);
        for (std::size_t k = n - 1; k-- > 0;) right[k] = std::max(right[k + 1], towers[k + 1].weight);
        std::vector<Tower> kept;
        for (std::size_t k = 0; k < n; ++k)
            if (towers[k].weight >= options.satellite * std::min(left[k], right[k])) kept.push_back(towers[k]);
        towers = std::move(kept);
    }
    if (towers.size() < 3) {
        throw FitError("found " + std::to_string(towers.size()) + " overlap towers; at least 3 are needed");
    }
    return towers;
}

double tower_spacing(std::span<const Tower> towers) {
    if (towers.size() < 2) throw FitError("tower spacing needs at least two towers");
    return (towers.back().center - towers.front().center) / static_cast<double>(towers.size() - 1);
}

std::vector<Tower> towers_near(std::span<const Tower> towers, double energy, std::size_t count) {
    std::vector<Tower> out(towers.begin(), towers.end());
    std::stable_sort(out.begin(), out.end(), [energy](const Tower& a, const Tower& b) {
        return std::abs(a.center - energy) < std::abs(b.center - energy);
    });
    if (out.size() > count) out.resize(count);
    std::sort(out.begin(), out.end(), [](const Tower& a, const Tower& b) { return a.center < b.center; });
    return out;
}

TowerFit fit_lambda(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 4) throw FitError("lambda fit needs at least 4 samples");
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : samples) {
        if (x < 0.0 || x > 1.2) throw ContractError("lambda fit samples must have x in [0, 1.2]");
        sxx += x * x * x * x;
        sxy += x * x * (y - 2.0);
    }
    if (sxx <= 0.0) throw FitError("lambda fit: all x values are zero");
    TowerFit fit;
    fit.lambda = sxy / sxx;
    fit.samples = samples.size();
    double ss = 0.0;
    for (const auto& [x, y] : samples) {
        const double r = y - fit.predict(x);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(samples.size()));
    return fit;
}

}  // namespace hyperscar
