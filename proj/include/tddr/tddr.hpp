#pragma once

#include "tddr/adam.hpp"
#include "tddr/common.hpp"
#include "tddr/config.hpp"
#include "tddr/container.hpp"
#include "tddr/fft.hpp"
#include "tddr/generator.hpp"
#include "tddr/image.hpp"
#include "tddr/io_adapters.hpp"
#include "tddr/latents.hpp"
#include "tddr/metrics.hpp"
#include "tddr/nudft.hpp"
#include "tddr/nufft.hpp"
#include "tddr/pgm.hpp"
#include "tddr/phantom.hpp"
#include "tddr/recon_bp.hpp"
#include "tddr/recon_common.hpp"
#include "tddr/recon_cs.hpp"
#include "tddr/recon_dip.hpp"
#include "tddr/selftest.hpp"
#include "tddr/sweep.hpp"
#include "tddr/system.hpp"
#include "tddr/tape.hpp"
#include "tddr/tensor.hpp"
#include "tddr/trajectory.hpp"
