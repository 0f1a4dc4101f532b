#pragma once

#include <functional>
#include <string>
#include <vector>

#include "repgraph/faircluster.hpp"
#include "repgraph/graph.hpp"

namespace repgraph::repdist {

struct ClusterMass {
    std::vector<double> masses; // simplex vector, one entry per cluster
};

struct LabeledGraph {
    graph::WeightedGraph g;
    std::vector<std::string> labels; // one per node
};

struct GedCosts {
    std::function<double(const std::string&, const std::string&)> node_sub;
    double node_indel = 1.0;
    std::function<double(double, double)> edge_sub; // weight pair -> cost
    double edge_indel = 1.0;

    // Unit indels, node substitution = length-normalized edit distance over
    // the node labels, edge substitution = |w - w'|.
    static GedCosts defaults();
};

ClusterMass cluster_mass(const faircluster::Partition& partition);

// sqrt of the Jensen-Shannon divergence between mass vectors; a metric.
double js_repertoire_distance(const ClusterMass& pa, const ClusterMass& pb);

// Minimal edit cost over all injective partial node mappings, including
// node insertions/deletions and the induced edge operations. Hard-capped
// at 8 nodes per side; larger graphs must use ged_assignment.
double ged_exact(const LabeledGraph& ga, const LabeledGraph& gb,
                 const GedCosts& costs);

// Hungarian assignment on the indel-augmented node cost matrix; the induced
// mapping is scored with the exact cost function, so the result upper-bounds
// ged_exact.
double ged_assignment(const LabeledGraph& ga, const LabeledGraph& gb,
                      const GedCosts& costs);

// ged / (max node count + max edge count); 0 when both graphs are empty.
double ged_normalized(double ged, const LabeledGraph& ga, const LabeledGraph& gb);

} // namespace repgraph::repdist
