#pragma once

#include <prism/adam.hpp>
#include <prism/bundle_io.hpp>
#include <prism/embedding_set.hpp>
#include <prism/embf_io.hpp>
#include <prism/error.hpp>
#include <prism/ld_loss.hpp>
#include <prism/ortho_projector.hpp>
#include <prism/projection.hpp>
#include <prism/synthetic.hpp>
#include <prism/trainer.hpp>
#include <prism/zeroshot.hpp>
