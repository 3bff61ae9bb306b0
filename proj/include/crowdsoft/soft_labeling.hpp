#pragma once

#include "crowdsoft/annotation_model.hpp"

namespace crowdsoft {

// c_{i,y} / Sum_y c_{i,y}. Labels with no votes get zero mass.
SoftLabelMatrix standard_normalize(const VoteMatrix& votes);
SoftLabelMatrix standard_normalize(const AnnotationSet& annotations);

// softmax over the raw vote counts of each item; every entry is positive.
SoftLabelMatrix softmax_normalize(const VoteMatrix& votes);
SoftLabelMatrix softmax_normalize(const AnnotationSet& annotations);

// Copies item ids and label names from `annotations` onto `soft`.
void attach_metadata(SoftLabelMatrix& soft, const AnnotationSet& annotations);

}  // namespace crowdsoft
