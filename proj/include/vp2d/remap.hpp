#pragma once

#include "vp2d/particles.hpp"
#include "vp2d/phase_grid.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace vp2d {

struct RemapConfig {
    int interval = 5;              // PIC steps between remaps; 0 disables
    double drop_threshold = 1e-9;  // regenerated |q| below this is dropped
    int positivity_iters = 3;
    // Maximum hypercube radius of the redistribution neighborhood (same
    // level only). Deficits spread within radius 1 and escalate ring by ring
    // only when a neighborhood has no positive capacity at all: the drop
    // threshold opens a one-to-two-cell gap at the support edge where the
    // kernel's negative lobes otherwise sit with no reachable capacity.
    int redistribution_radius = 2;
};

struct RemapReport {
    double q_before = 0.0;
    double q_after = 0.0;
    double dropped = 0.0;  // signed ledger of sub-threshold weights
    double lost = 0.0;     // mass truncated at the velocity-domain boundary / escapees
    std::int64_t negative_cells = 0;  // negatives found by the first sweep
    int iterations_used = 0;
    std::int64_t zero_capacity = 0;  // deficits with no positive neighborhood
    std::int64_t flagged = 0;        // cells below -1e-13*max f after the last sweep
    double min_f = 0.0;
    double max_f = 0.0;
    std::size_t particles_out = 0;

    // Conservation residual net of the explicit ledgers.
    double residual() const { return (q_after + dropped + lost) - q_before; }
};

// Dense per-level array over the deposit support. Window boxes may include
// invalid cells and out-of-box halo cells; values are f (charge per volume).
class CompositeField {
  public:
    struct Win {
        Box4 box;
        std::array<std::ptrdiff_t, 4> stride{};
        std::vector<double> f;

        std::ptrdiff_t offset(const Int4& idx) const {
            std::ptrdiff_t o = 0;
            for (int d = 0; d < kDim; ++d) o += std::ptrdiff_t(idx[d] - box.lo[d]) * stride[d];
            return o;
        }
        double& at(const Int4& idx) { return f[std::size_t(offset(idx))]; }
        double at(const Int4& idx) const { return f[std::size_t(offset(idx))]; }
        bool contains(const Int4& idx) const { return box.contains(idx); }
    };

    CompositeField(const CompositeGrid& grid, bool periodic_x, bool periodic_y)
        : grid_(&grid), periodic_{periodic_x, periodic_y}, wins_(std::size_t(grid.num_levels())) {}

    const CompositeGrid& grid() const { return *grid_; }
    bool periodic(int d) const { return d < 2 && periodic_[std::size_t(d)]; }
    Win& win(int l) { return wins_[std::size_t(l)]; }
    const Win& win(int l) const { return wins_[std::size_t(l)]; }
    int num_levels() const { return int(wins_.size()); }

    void reset(const std::vector<Box4>& boxes);  // allocate and zero windows
    double charge_total() const;                 // compensated sum over window cells

  private:
    const CompositeGrid* grid_;
    std::array<bool, 2> periodic_;
    std::vector<Win> wins_;
};

// W4 deposit of every particle onto its valid cell's level (4^4 stencil, halo
// and invalid cells included). Returns truncated/escaped mass in *lost.
void deposit_w4_composite(const ParticleSet& p, CompositeField& field, double* lost);

// Move halo deposits down by volume-weighted projection and invalid-cell
// deposits up by cloud-in-cell splitting; afterwards all charge sits in
// valid cells. Out-of-domain truncation happens at deposit time, so the
// transfer itself conserves exactly.
void transfer_interface_charge(CompositeField& field);

struct RedistributeStats {
    std::int64_t negative_cells = 0;
    int iterations_used = 0;
    std::int64_t zero_capacity = 0;
    std::int64_t flagged = 0;
    double min_f = 0.0;
    double max_f = 0.0;
};

// Conservative local repair: each sweep zeroes negative cells and charges the
// deficit to same-level neighbors in proportion to their positive capacity,
// widening the neighborhood ring by ring (up to `radius`) only when it holds
// no capacity. Cells that find none anywhere are left negative and flagged.
RedistributeStats redistribute_positivity(CompositeField& field, int radius, int iterations);

// One particle per valid cell with q = f * volume, dropping |q| < threshold
// into the signed *dropped ledger.
ParticleSet regenerate_particles(const CompositeField& field, double threshold, int species_sign,
                                 double* dropped);

// Full pipeline with reusable scratch. remap() replaces the particle set.
class Remapper {
  public:
    Remapper(const CompositeGrid& grid, const RemapConfig& cfg, bool periodic_x, bool periodic_y)
        : cfg_(cfg), field_(grid, periodic_x, periodic_y) {}

    RemapReport remap(ParticleSet& p);

    const RemapConfig& config() const { return cfg_; }
    CompositeField& field() { return field_; }

  private:
    RemapConfig cfg_;
    CompositeField field_;
};

}  // namespace vp2d
